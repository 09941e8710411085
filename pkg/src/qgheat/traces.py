"""Heat trace and edge trace as sums over closed paths, checked against spectra."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .graph import MetricGraph
from .kernel import EdgeDiagonal, choose_lcut, integrate_edge
from .paths import (edge_closed_sum, enumerate_primitive_cycles, rooted_cycle_sum,
                    truncation_bound)
from .spectral import EdgeAmplitude, Spectrum

_LMAX_CAP_EDGES = 400


def choose_trace_lmax(g: MetricGraph, t: float, tol: float) -> float:
    """Cycle-length cutoff such that the neglected part of the cycle sum is below ``tol``."""
    a0 = g.a0
    L = a0
    while 2 * g.m * truncation_bound(g, t, L, {1: 1.0}) > tol:
        L += 0.5 * a0
        if L > _LMAX_CAP_EDGES * a0:
            raise ArithmeticError(f"trace tolerance {tol:g} unreachable at t={t:g}")
    return L


def cycle_sum(g: MetricGraph, t: float, L_max: float, reading: str = "iterate",
              method: str = "aggregate") -> float:
    """``sum_gamma sum_k coeff(gamma, k) l(gamma) exp(-(k l)^2/4t)`` without the prefactor.

    ``reading="iterate"`` weights the k-th iterate by the cyclic coefficient of
    ``gamma^k``; ``reading="printed"`` uses the coefficient of ``gamma`` for every k.
    """
    if reading == "iterate" and method == "aggregate":
        return rooted_cycle_sum(g, L_max).gaussian_sum(t)
    if reading not in ("iterate", "printed"):
        raise ValueError(f"unknown reading {reading!r}")
    terms = []
    for cyc in enumerate_primitive_cycles(g, L_max):
        k = 1
        while k * cyc.length <= L_max + 1e-12:
            c = cyc.coefficient ** k if reading == "iterate" else cyc.coefficient
            terms.append(c * cyc.length * math.exp(-(k * cyc.length) ** 2 / (4 * t)))
            k += 1
    return math.fsum(terms)


def roth_trace(g: MetricGraph, t: float, L_max: float | None = None, tol: float = 1e-13,
               reading: str = "iterate", method: str = "aggregate") -> float:
    """Heat trace from the bulk term, the Euler characteristic term and the cycle sum."""
    if not t > 0:
        raise ValueError("t must be positive")
    L_max = choose_trace_lmax(g, t, tol) if L_max is None else L_max
    r = math.sqrt(4 * math.pi * t)
    V, E = g.n_original_vertices, g.n_original_edges
    return math.fsum([g.total_length / r, 0.5 * (V - E),
                      cycle_sum(g, t, L_max, reading, method) / r])


def fit_constant_term(g: MetricGraph, ts, eigen_traces, tol: float = 1e-13) -> float:
    """Least-squares constant in ``eigen trace - L/sqrt(4 pi t) - cycle sum``."""
    res = [tr - g.total_length / math.sqrt(4 * math.pi * t)
           - cycle_sum(g, t, choose_trace_lmax(g, t, tol)) / math.sqrt(4 * math.pi * t)
           for t, tr in zip(ts, eigen_traces)]
    return float(np.mean(res))


def compare_readings(g: MetricGraph, ts, eigen_traces, L_max: float) -> dict:
    """Max relative error of each coefficient reading against an eigenvalue trace."""
    out = {}
    for reading in ("iterate", "printed"):
        errs = [abs(roth_trace(g, t, L_max, reading=reading, method="enumerate") - tr) / abs(tr)
                for t, tr in zip(ts, eigen_traces)]
        out[reading] = max(errs)
    out["preferred"] = min(("iterate", "printed"), key=out.get)
    return out


# -- edge trace -------------------------------------------------------------

@dataclass
class EdgeTraceReport:
    edge: str
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    c_e: float
    max_deviation: float
    lhs_tail: np.ndarray = field(repr=False)
    rhs_bound: np.ndarray = field(repr=False)

    @property
    def D(self) -> np.ndarray:
        return self.lhs - self.rhs

    def dD_dt(self) -> np.ndarray:
        return np.gradient(self.D, self.t)

    def rows(self) -> list[dict]:
        return [{"t": float(t), "lhs": float(l), "rhs": float(r), "D": float(l - r),
                 "lhs_tail": float(lt), "rhs_bound": float(rb)}
                for t, l, r, lt, rb in zip(self.t, self.lhs, self.rhs, self.lhs_tail, self.rhs_bound)]


def edge_trace_sides(g: MetricGraph, edge: str, ts, spec: Spectrum, amps: EdgeAmplitude,
                     L_max: float | None = None, M: int | None = None,
                     tol: float = 1e-11) -> EdgeTraceReport:
    """Both sides of the edge trace identity on a t grid, and the fitted constant.

    The spectral side uses the first ``M`` eigenfunctions; its tail is
    estimated from the Weyl envelope and must stay below ``tol``.
    """
    ts = np.sort(np.asarray(ts, dtype=float))
    M = len(spec) if M is None else M
    if M > len(spec):
        raise ValueError(f"only {len(spec)} eigenfunctions available")
    b2 = amps.b[:M, amps.column(edge)] ** 2
    lam = spec.lam[:M]
    L_tot = g.total_length
    B2 = float(b2.max())
    s0 = float(spec.sigma[M - 1])
    lhs, rhs, tails, bounds = [], [], [], []
    for t in ts:
        tail = 0.5 * B2 * (L_tot / math.pi) * 0.5 * math.sqrt(math.pi / t) * math.erfc(s0 * math.sqrt(t))
        if tail > tol:
            raise ArithmeticError(f"spectral tail {tail:.3g} exceeds {tol:g} at t={t:g}; "
                                  "raise sigma_max")
        Lc = choose_lcut(g, t, tol) if L_max is None else L_max
        closed = edge_closed_sum(g, edge, Lc)
        lhs.append(0.5 * math.fsum(np.exp(-lam * t) * b2))
        rhs.append(closed.gaussian_sum(t) / math.sqrt(4 * math.pi * t))
        tails.append(tail)
        bounds.append(truncation_bound(g, t, Lc))
    lhs, rhs = np.array(lhs), np.array(rhs)
    D = lhs - rhs
    half = D[len(D) // 2:]
    c_e = float(np.mean(half))
    return EdgeTraceReport(edge, ts, lhs, rhs, c_e, float(np.max(np.abs(D - c_e))),
                           np.array(tails), np.array(bounds))


# -- integrated small-time asymptotics ----------------------------------------

def integrated_asymptotics(g: MetricGraph, edge: str, f_coeffs, t: float,
                           tol: float = 1e-12) -> dict:
    """Quadrature of ``int f h`` and ``int f dh/dx`` on an edge with the small-time predictions.

    ``f_coeffs`` are power-series coefficients of ``f`` in the edge coordinate.
    ``pred_dx`` uses a minus sign on the ``f'`` corrections (what integration
    by parts gives); ``pred_dx_plus`` keeps the opposite sign for comparison.
    """
    e = g.edge(edge)
    a = e.length
    d0, d1 = g.deg(e.u), g.deg(e.v)
    f = Polynomial(f_coeffs)
    fp = f.deriv()
    Lc = choose_lcut(g, t, tol, "hx")
    ed = EdgeDiagonal.cached(g, edge, Lc)
    int_fh = integrate_edge(lambda xs: f(xs) * ed.evaluate(t, xs), a, tol)
    int_fdh = integrate_edge(lambda xs: f(xs) * ed.evaluate(t, xs, "hx"), a, tol)
    r = math.sqrt(4 * math.pi * t)
    F = f.integ()
    k0, k1 = 2 / d0 - 1, 2 / d1 - 1
    pred_h = (F(a) - F(0)) / r + 0.25 * k0 * f(0) + 0.25 * k1 * f(a)
    lead = (k1 * f(a) - k0 * f(0)) / r
    corr = 0.25 * k0 * fp(0) + 0.25 * k1 * fp(a)
    return {"t": t, "int_fh": int_fh, "int_fdxh": int_fdh,
            "pred_h": pred_h, "pred_dx": lead - corr, "pred_dx_plus": lead + corr,
            "residual_h": int_fh - pred_h, "residual_dx": int_fdh - (lead - corr),
            "residual_dx_plus": int_fdh - (lead + corr)}


def weyl_count_check(spec: Spectrum, L: float, n_probe: int = 2000) -> dict:
    """``max |N(sigma^2) - L sigma / pi|`` over the computed range."""
    sig = np.linspace(0.0, spec.sigma_max, n_probe)
    # probe just below and at every eigenvalue, where N jumps
    pts = np.concatenate([sig, spec.sigma, np.maximum(spec.sigma - 1e-9, 0.0)])
    pts = pts[pts <= spec.sigma_max]
    N = np.searchsorted(spec.sigma, pts, side="right")
    dev = np.abs(N - L * pts / math.pi)
    return {"sigma_max": spec.sigma_max, "max_deviation": float(dev.max()),
            "deviation_at_end": float(abs(spec.counting(spec.sigma_max ** 2)
                                          - L * spec.sigma_max / math.pi))}
