"""Heat kernel evaluation by path sums with certified truncation bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .graph import GraphError, GraphPoint, MetricGraph
from .paths import (LengthSum, arrivals, beta, edge_closed_sum, enumerate_paths,
                    insert_point_vertex, return_sum, truncation_bound)

DEFAULT_TOL = 1e-10
# L_cut is searched on this grid (in units of a0) and capped at _MAX_LCUT_EDGES * a0
_LCUT_STEP = 0.25
_MAX_LCUT_EDGES = 400

# |d^k/dx^k| and |d/dt| of a Gaussian term, as polynomial majorants in the path length
MOMENTS = {
    "h": lambda t: {0: 1.0},
    "hx": lambda t: {1: 1.0 / t},
    "hxx": lambda t: {2: 1.0 / t**2, 0: 2.0 / t},
    "hxxx": lambda t: {3: 1.0 / t**3, 1: 6.0 / t**2},
    "ht": lambda t: {2: 0.25 / t**2, 0: 0.5 / t},
    "htx": lambda t: {3: 0.25 / t**3, 1: 1.5 / t**2},
}


class TruncationError(ArithmeticError):
    """Requested tolerance cannot be certified."""


@dataclass(frozen=True)
class KernelValue:
    value: float
    error_bound: float
    t: float
    points: tuple
    L_cut: float

    def __float__(self) -> float:
        return self.value


def choose_lcut(g: MetricGraph, t: float, tol: float, kind: str = "h") -> float:
    """Smallest grid value of L_cut whose truncation bound is at most ``tol``."""
    if not t > 0:
        raise ValueError("t must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    moments = MOMENTS[kind](t)
    step = _LCUT_STEP * g.a0
    hi = step
    while truncation_bound(g, t, hi, moments) > tol:
        hi *= 2
        if hi > _MAX_LCUT_EDGES * g.a0:
            raise TruncationError(f"tolerance {tol:g} unreachable at t={t:g}; "
                                  "increase tol or reduce t")
    lo_k, hi_k = 0, int(round(hi / step))
    while hi_k - lo_k > 1:
        mid = (lo_k + hi_k) // 2
        if truncation_bound(g, t, mid * step, moments) <= tol:
            hi_k = mid
        else:
            lo_k = mid
    return hi_k * step


def _gauss(y, t):
    return np.exp(-y * y / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)


def _colsum(M: np.ndarray) -> np.ndarray:
    """Exactly rounded column sums (independent of term order)."""
    if M.ndim == 1:
        return np.array([math.fsum(M)])
    return np.array([math.fsum(M[:, j]) for j in range(M.shape[1])])


# -- diagonal on one edge ---------------------------------------------------

class EdgeDiagonal:
    """The diagonal kernel on one edge, split by x-dependence.

    ``h(t, x) = G[closed] + G[2x + returns at u] + G[2(a - x) + returns at v]``
    where the closed part collects closed paths starting on the edge (no x
    dependence) and the return parts are loops that bounce back to the point
    through one end of the edge.
    """

    def __init__(self, g: MetricGraph, edge: str, L_cut: float):
        self.graph, self.edge, self.L_cut = g, edge, L_cut
        e = g.edge(edge)
        i = g.edge_index(edge)
        self.a = e.length
        self.d0, self.d1 = g.deg(e.u), g.deg(e.v)
        self.closed: LengthSum = edge_closed_sum(g, edge, L_cut)
        self.returns0: LengthSum = return_sum(g, 2 * i + 1, L_cut)
        self.returns1: LengthSum = return_sum(g, 2 * i, L_cut)

    @classmethod
    def cached(cls, g: MetricGraph, edge: str, L_cut: float) -> "EdgeDiagonal":
        key = ("diag", edge, L_cut)
        if key not in g._cache:
            g._cache[key] = cls(g, edge, L_cut)
        return g._cache[key]

    def _terms(self, t: float, x: np.ndarray, order: int):
        """Gaussian y-derivative ``order`` for each part, as (closed, r0, r1) matrices."""
        def deriv(y):
            G = _gauss(y, t)
            if order == 0:
                return G
            if order == 1:
                return -y / (2 * t) * G
            if order == 2:
                return (y * y / (4 * t * t) - 1 / (2 * t)) * G
            return (-y**3 / (8 * t**3) + 3 * y / (4 * t * t)) * G

        closed = self.closed.coeffs * deriv(self.closed.lengths)
        y0 = 2 * x[None, :] + self.returns0.lengths[:, None]
        y1 = 2 * (self.a - x[None, :]) + self.returns1.lengths[:, None]
        r0 = self.returns0.coeffs[:, None] * deriv(y0)
        r1 = self.returns1.coeffs[:, None] * deriv(y1)
        return closed, r0, r1

    def closed_part(self, t: float) -> float:
        """The x-independent part (the edge loop sum divided by sqrt(4 pi t))."""
        return math.fsum(self.closed.coeffs * _gauss(self.closed.lengths, t))

    def evaluate(self, t: float, x, kind: str = "h") -> np.ndarray:
        """``kind`` in h, hx, hxx, hxxx, ht, htx; all derivatives are termwise analytic."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        # x-derivative of y is +2 on the u-side returns, -2 on the v-side returns
        order, s0, s1, with_closed = {
            "h": (0, 1, 1, True), "hx": (1, 2, -2, False), "hxx": (2, 4, 4, False),
            "hxxx": (3, 8, -8, False), "ht": (2, 1, 1, True), "htx": (3, 2, -2, False),
        }[kind]
        closed, r0, r1 = self._terms(t, x, order)
        parts = [s0 * r0, s1 * r1]
        if with_closed:
            parts.insert(0, np.repeat(closed[:, None], len(x), axis=1))
        return _colsum(np.vstack(parts))

    def bound(self, t: float, kind: str = "h") -> float:
        return truncation_bound(self.graph, t, self.L_cut, MOMENTS[kind](t))


def _edge_coordinate(g: MetricGraph, q: GraphPoint) -> tuple[str, float]:
    key = g.canonical(q)
    if key[0] == "v":
        p = g.point_of_vertex(key[1])
        return p.edge, p.x
    return key[1], key[2]


def heat_diagonal(g: MetricGraph, t: float, q: GraphPoint, tol: float = DEFAULT_TOL) -> KernelValue:
    """``h(t, q) = H(t, q, q)`` with a certified truncation bound."""
    L_cut = choose_lcut(g, t, tol)
    edge, x = _edge_coordinate(g, q)
    ed = EdgeDiagonal.cached(g, edge, L_cut)
    return KernelValue(float(ed.evaluate(t, x)[0]), ed.bound(t), t, (q, q), L_cut)


def heat_diagonal_grid(g: MetricGraph, ts, edge: str, n: int,
                       tol: float = DEFAULT_TOL) -> dict:
    """Sample ``h(t, x)`` at ``n + 1`` equispaced points of ``edge`` for each ``t``."""
    ts = [float(t) for t in ts]
    L_cut = max(choose_lcut(g, t, tol) for t in ts)
    ed = EdgeDiagonal.cached(g, edge, L_cut)
    xs = np.linspace(0.0, ed.a, n + 1)
    values = np.column_stack([ed.evaluate(t, xs) for t in ts])
    return {"x": xs, "t": ts, "values": values,
            "bounds": [ed.bound(t) for t in ts], "L_cut": L_cut}


# -- general kernel ---------------------------------------------------------

def _arrivals_cached(g: MetricGraph, q: GraphPoint, L_cut: float):
    key = ("arr", g.canonical(q), L_cut)
    if key not in g._cache:
        g._cache[key] = arrivals(g, q, L_cut)
    return g._cache[key]


def kernel_row(g: MetricGraph, t: float, q1: GraphPoint, edge: str, xs,
               L_cut: float) -> np.ndarray:
    """``H(t, q1, (edge, x))`` for an array of coordinates on an original edge."""
    arr = _arrivals_cached(g, q1, L_cut)
    g1, src = arr.graph, arr.source
    pref = 2.0 / g1.deg(src)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.empty(len(xs))
    # group the coordinates by the sub-edge of g1 that contains them
    located = [g1.relocate(GraphPoint(edge, float(x))) for x in xs]
    for sub in sorted({p.edge for p in located}):
        idx = np.array([i for i, p in enumerate(located) if p.edge == sub])
        x = np.array([located[i].x for i in idx])
        j = g1.edge_index(sub)
        E = g1.edges[j]
        ends = ((g1.vertex_index(E.u), 2 * j, x), (g1.vertex_index(E.v), 2 * j + 1, E.length - x))
        cols = []
        for w, b_into, dist in ends:
            if g1.vertices[w] == src:
                cols.append(pref * _gauss(dist, t)[None, :])
            for b in g1.out_bonds[w]:
                b_arr = b ^ 1  # bonds arriving at w
                s = arr.by_bond.get(b_arr)
                if s is None or not len(s):
                    continue
                wgt = beta(g1, b_arr, b_into)
                if wgt == 0.0:
                    continue
                y = s.lengths[:, None] + dist[None, :]
                cols.append(wgt * s.coeffs[:, None] * _gauss(y, t))
        out[idx] = _colsum(np.vstack(cols))
    return out


def heat_kernel(g: MetricGraph, t: float, q1: GraphPoint, q2: GraphPoint,
                tol: float = DEFAULT_TOL) -> KernelValue:
    """``H(t, q1, q2)`` as a truncated path sum with certified bound."""
    L_cut = choose_lcut(g, t, tol)
    val = kernel_row(g, t, q1, q2.edge, [q2.x], L_cut)[0]
    return KernelValue(float(val), truncation_bound(g, t, L_cut), t, (q1, q2), L_cut)


# -- asymptotics ------------------------------------------------------------

def small_time_threshold(g: MetricGraph) -> float:
    return 0.9 * g.a0**2 / (2.0 * math.log(max(g.n_original_edges, 2)))


def nearest_vertex(g: MetricGraph, q: GraphPoint) -> tuple[str, float]:
    key = g.canonical(q)
    if key[0] == "v":
        return key[1], 0.0
    e = g.edge(key[1])
    x = key[2]
    return (e.u, x) if x <= e.length - x else (e.v, e.length - x)


def small_time_approx(g: MetricGraph, t: float, q: GraphPoint) -> float:
    """Leading small-time diagonal value with the nearest-vertex image term."""
    if not 0 < t <= small_time_threshold(g):
        raise ValueError(f"t={t:g} above the small-time threshold {small_time_threshold(g):g}")
    v0, dist = nearest_vertex(g, q)
    d0 = g.deg(v0)
    return (1.0 + (2.0 / d0 - 1.0) * math.exp(-dist * dist / t)) / math.sqrt(4 * math.pi * t)


def vertex_taylor(d0: int, t: float, x: float) -> float:
    """Quadratic expansion of the diagonal at distance ``x`` from a degree-``d0`` vertex."""
    return (2.0 / d0 + (d0 - 2.0) / d0 * x * x / t) / math.sqrt(4 * math.pi * t)


def distance(g: MetricGraph, q1: GraphPoint, q2: GraphPoint) -> float:
    g1, v1 = insert_point_vertex(g, q1)
    g2, v2 = insert_point_vertex(g1, g1.relocate(q2))
    return g2.distances_from(v1)[v2]


def off_diagonal_constant(g: MetricGraph, q1: GraphPoint, q2: GraphPoint) -> float:
    """Sum of path coefficients over the minimal paths from ``q1`` to ``q2``."""
    if g.same_point(q1, q2):
        raise ValueError("points coincide")
    d = distance(g, q1, q2)
    eps = 1e-9 * max(1.0, d)
    return math.fsum(p.alpha for p in enumerate_paths(g, q1, q2, d + eps)
                     if abs(p.length - d) <= eps)


# -- derivatives and the modified heat equation ---------------------------

def _interior(g: MetricGraph, edge: str, x: float) -> None:
    a = g.edge(edge).length
    if not 0 < x < a:
        raise GraphError(f"x={x} is not interior to edge {edge!r}")


def dx_heat_diagonal(g: MetricGraph, t: float, edge: str, x: float,
                     tol: float = DEFAULT_TOL) -> KernelValue:
    """``d/dx h(t, x)`` on ``edge`` by termwise differentiation."""
    _interior(g, edge, x)
    L_cut = choose_lcut(g, t, tol, "hx")
    ed = EdgeDiagonal.cached(g, edge, L_cut)
    return KernelValue(float(ed.evaluate(t, x, "hx")[0]), ed.bound(t, "hx"), t,
                       (GraphPoint(edge, x),) * 2, L_cut)


def _d1(f, z, h):
    return (f(z - 2 * h) - 8 * f(z - h) + 8 * f(z + h) - f(z + 2 * h)) / (12 * h)


def _d2(f, z, h):
    return (-f(z - 2 * h) + 16 * f(z - h) - 30 * f(z) + 16 * f(z + h) - f(z + 2 * h)) / (12 * h * h)


def pde_residual(g: MetricGraph, t: float, edge: str, x: float, method: str = "analytic",
                 tol: float = 1e-13, n_probe: int = 9) -> tuple[float, float]:
    """Residuals of the modified heat equation on ``edge``.

    Returns ``((d_t - d_xx/4) d_x h at x, spread over the edge of (d_t - d_xx/4) h)``.
    ``method='fd'`` replaces the t- and second x-derivatives by five-point finite
    differences of the analytic ``h`` and ``d_x h``.
    """
    _interior(g, edge, x)
    a = g.edge(edge).length
    L_cut = max(choose_lcut(g, t, tol, k) for k in ("h", "hxxx", "htx"))
    ed = EdgeDiagonal.cached(g, edge, L_cut)
    margin = min(x, a - x, 0.05 * a)
    probes = np.unique(np.concatenate([[x], np.linspace(margin, a - margin, n_probe)]))
    if method == "analytic":
        r1 = ed.evaluate(t, x, "htx")[0] - 0.25 * ed.evaluate(t, x, "hxxx")[0]
        op = ed.evaluate(t, probes, "ht") - 0.25 * ed.evaluate(t, probes, "hxx")
    elif method == "fd":
        dt = 1e-3 * t
        dx = min(5e-4 * a, 0.2 * margin)
        hx_t = _d1(lambda s: ed.evaluate(s, x, "hx")[0], t, dt)
        hx_xx = _d2(lambda z: ed.evaluate(t, z, "hx")[0], x, dx)
        r1 = hx_t - 0.25 * hx_xx
        op = np.array([_d1(lambda s: ed.evaluate(s, z, "h")[0], t, dt)
                       - 0.25 * _d2(lambda w: ed.evaluate(t, w, "h")[0], z, dx)
                       for z in probes])
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(r1), float(op.max() - op.min())


def kirchhoff_defect(g: MetricGraph, t: float, vertex: str, tol: float = 1e-12) -> float:
    """Sum of outward derivatives of ``h(t, .)`` over the edges at ``vertex``."""
    L_cut = choose_lcut(g, t, tol, "hx")
    vi = g.vertex_index(vertex)
    total = []
    for b in g.out_bonds[vi]:
        e = g.edges[b // 2]
        ed = EdgeDiagonal.cached(g, e.id, L_cut)
        if b % 2 == 0:
            total.append(ed.evaluate(t, 0.0, "hx")[0])
        else:
            total.append(-ed.evaluate(t, e.length, "hx")[0])
    return math.fsum(total)


# -- quadrature -------------------------------------------------------------

def integrate_edge(f, a: float, tol: float = 1e-10, n0: int = 32, n_max: int = 4096) -> float:
    """Gauss-Legendre on ``[0, a]``, doubling the node count until two estimates agree."""
    prev = None
    n = n0
    while n <= n_max:
        z, w = leggauss(n)
        xs = 0.5 * a * (z + 1.0)
        val = 0.5 * a * math.fsum(w * np.asarray(f(xs)))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
        n *= 2
    raise ArithmeticError("edge quadrature did not converge")


def integrate_diagonal(g: MetricGraph, t: float, tol: float = 1e-12, weight=None) -> float:
    """``int_G w(e, x) h(t, x) dx``; the unweighted integral is the heat trace."""
    L_cut = choose_lcut(g, t, tol)
    parts = []
    for e in g.edges:
        ed = EdgeDiagonal.cached(g, e.id, L_cut)
        if weight is None:
            parts.append(integrate_edge(lambda xs: ed.evaluate(t, xs), e.length))
        else:
            parts.append(integrate_edge(lambda xs: weight(e.id, xs) * ed.evaluate(t, xs), e.length))
    return math.fsum(parts)


def chapman_kolmogorov(g: MetricGraph, t: float, s: float, q1: GraphPoint, q2: GraphPoint,
                       tol: float = 1e-12) -> tuple[float, float]:
    """Return ``(int_G H(t, q1, r) H(s, r, q2) dr, H(t + s, q1, q2))``."""
    Lt, Ls = choose_lcut(g, t, tol), choose_lcut(g, s, tol)
    parts = [integrate_edge(lambda xs: kernel_row(g, t, q1, e.id, xs, Lt)
                            * kernel_row(g, s, q2, e.id, xs, Ls), e.length)
             for e in g.edges]
    return math.fsum(parts), heat_kernel(g, t + s, q1, q2, tol).value
