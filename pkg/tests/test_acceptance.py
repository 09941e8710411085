"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from qgheat.closed_forms import (SymmetricGraphData, interval_cosine_series, interval_images,
                                 poisson_identities, sine_coefficient, symmetric_diagonal,
                                 theta_reduction_residual)
from qgheat.graph import (GraphPoint, complete_graph, cube_graph, interval_graph, star_graph)
from qgheat.kernel import (EdgeDiagonal, chapman_kolmogorov, choose_lcut, heat_diagonal,
                           heat_kernel, integrate_diagonal, pde_residual)
from qgheat.paths import bond_scattering_matrix
from qgheat.spectral import (closed_form_spectrum, edge_amplitudes, local_weyl_average,
                             secular_spectrum, symmetric_spectrum)
from qgheat.traces import edge_trace_sides, fit_constant_term, roth_trace
from qgheat.verify import zoo


def test_c01_interval_oracles(record):
    g = interval_graph(1.0)
    grid = [0.1, 0.3, 0.5, 0.7, 0.9]
    start = time.perf_counter()
    worst = 0.0
    for t in (0.01, 0.1, 1.0):
        X, Y = np.meshgrid(grid, grid, indexing="ij")
        cos = interval_cosine_series(1.0, t, X, Y, N=500)
        for i, x in enumerate(grid):
            for j, y in enumerate(grid):
                path = heat_kernel(g, t, GraphPoint("e", x), GraphPoint("e", y), tol=1e-20).value
                img = interval_images(1.0, t, x, y)
                vals = (path, cos[i, j], img)
                for a in range(3):
                    for b in range(a + 1, 3):
                        worst = max(worst, abs(vals[a] - vals[b]) / max(abs(vals[a]), abs(vals[b])))
    elapsed = time.perf_counter() - start
    record("C1", "interval: path sum / cosine series / images (relative)", worst, 1e-10,
           note=f"{elapsed:.2f}s")
    record("C1", "interval oracle runtime (s)", elapsed, 1.0)


def test_c02_scattering_algebra(record):
    worst_rows, worst_inv = 0.0, 0.0
    for d in range(1, 11):
        S = bond_scattering_matrix(star_graph(d, 1.0))
        worst_rows = max(worst_rows, float(np.max(np.abs(S.sum(axis=0) - 1.0))))
        M = 2.0 / d * np.ones((d, d)) - np.eye(d)
        worst_inv = max(worst_inv, float(np.max(np.abs(M @ M - np.eye(d)))))
    record("C2", "beta row sums = 1, d=1..10", worst_rows, 1e-15)
    record("C2", "(2/d J - I)^2 = I, d=1..10", worst_inv, 1e-15)


def test_c03_certified_truncation(record):
    rng = np.random.default_rng(2024)
    worst, n = -math.inf, 0
    for name, g in zoo().items():
        for t in (0.05, 0.2):
            L = choose_lcut(g, t, 1e-6)
            for _ in range(20):
                e = g.edges[rng.integers(g.m)]
                x = float(rng.uniform(0, e.length))
                lo = EdgeDiagonal.cached(g, e.id, L)
                hi = EdgeDiagonal.cached(g, e.id, 2 * L)
                gap = abs(lo.evaluate(t, x)[0] - hi.evaluate(t, x)[0]) - lo.bound(t)
                worst = max(worst, gap)
                n += 1
    record("C3", "max(|h(L)-h(2L)| - bound(L)) over zoo", worst, 0.0, note=f"{n} points")


def test_c04_small_time_vertex_factor(record):
    g = star_graph(5, 1.0)
    t = 0.005
    r = math.sqrt(4 * math.pi * t)
    centre = r * heat_diagonal(g, t, GraphPoint("e0", 0.0)).value
    inner = r * heat_diagonal(g, t, GraphPoint("e0", 0.5)).value
    record("C4", "star d=5 centre: sqrt(4 pi t) h - 2/5", abs(centre - 0.4), 1e-6)
    record("C4", "star d=5 interior: sqrt(4 pi t) h - 1", abs(inner - 1.0), 1e-6)


def test_c05_local_weyl(record):
    start = time.perf_counter()
    spec, amps = closed_form_spectrum("star", 1300.0, d=5, a=1.0)
    M = 2000
    centre = local_weyl_average(spec, amps, GraphPoint("e0", 0.0), M)
    inner = local_weyl_average(spec, amps, GraphPoint("e0", 0.37), M)
    elapsed = time.perf_counter() - start
    record("C5", "star centre (1/M) sum psi^2 vs 0.08 (rel)", abs(centre / 0.08 - 1), 0.05,
           note=f"value {centre:.5f}")
    record("C5", "star interior (1/M) sum psi^2 vs 0.2 (rel)", abs(inner / 0.2 - 1), 0.05,
           note=f"value {inner:.5f}")
    record("C5", "local Weyl runtime (s)", elapsed, 5.0)


def test_c06_edge_trace(record):
    ts = np.linspace(0.05, 1.0, 20)
    spec, amps = closed_form_spectrum("star", 200.0, d=5, a=1.0)
    r = edge_trace_sides(star_graph(5, 1.0), "e0", ts, spec, amps)
    record("C6", "star d=5: spread of D(t)", float(np.ptp(r.D)), 1e-8, note=f"c_e={r.c_e:.3g}")
    k4 = complete_graph(4, 1.0)
    S = secular_spectrum(k4, 30.0)
    r = edge_trace_sides(k4, k4.edges[0].id, ts, S, edge_amplitudes(k4, S))
    record("C6", "K4: spread of D(t)", float(np.ptp(r.D)), 1e-8, note=f"c_e={r.c_e:.12g}")
    spec, amps = closed_form_spectrum("interval", 200.0, a=1.0)
    r = edge_trace_sides(interval_graph(1.0), "e", ts, spec, amps)
    record("C6", "interval: |c_e|", abs(r.c_e), 1e-10)


def _roth_cases():
    k4 = complete_graph(4, 1.0)
    return [("interval", interval_graph(1.0), closed_form_spectrum("interval", 60.0)[0]),
            ("star d=3", star_graph(3, 1.0), closed_form_spectrum("star", 60.0, d=3, a=1.0)[0]),
            ("K4", k4, symmetric_spectrum(SymmetricGraphData.from_graph(k4), 60.0))]


@pytest.mark.parametrize("case", range(3))
def test_c07_roth_trace(record, case):
    name, g, spec = _roth_cases()[case]
    ts = np.linspace(0.05, 0.5, 10)
    tr = [spec.trace(t) for t in ts]
    rel = max(abs(roth_trace(g, t) - s) / s for t, s in zip(ts, tr))
    record("C7", f"{name}: cycle trace vs eigenvalue trace (rel)", rel, 1e-8)
    const = fit_constant_term(g, ts, tr)
    target = 0.5 * (g.n_original_vertices - g.n_original_edges)
    record("C7", f"{name}: fitted constant - (V-E)/2", abs(const - target), 1e-6)


def test_c08_symmetric_closed_form(record):
    k4 = complete_graph(4, 1.0)
    data = SymmetricGraphData.from_graph(k4)
    e = k4.edges[0]
    worst = 0.0
    for t in (0.05, 0.1, 0.3, 1.0):
        for x in np.linspace(0, e.length, 50):
            worst = max(worst, abs(symmetric_diagonal(data, t, x)
                                   - heat_diagonal(k4, t, GraphPoint(e.id, float(x))).value))
    record("C8", "K4 symmetric_diagonal vs path sum", worst, 1e-8)
    (sig, mu), = data.Q
    record("C8", "K4 Q = {arccos(-1/3)} with mu = 3", abs(sig - math.acos(-1 / 3)), 1e-12,
           ok=mu == 3 and abs(sig - math.acos(-1 / 3)) < 1e-12)
    cube = SymmetricGraphData.from_graph(cube_graph(1.0))
    for name, D, c in (("K4", data, 2), ("cube", cube, 1)):
        total = sum(m for _, m in D.Q)
        record("C8", f"{name}: sum mu - (n - 2/c)", abs(total - (D.n - 2 / D.c)), 0.0,
               ok=total == D.n - 2 / D.c and D.c == c)


def test_c09_sine_coefficients(record):
    g = star_graph(5, 1.0)
    t, a = 0.05, 1.0
    ed = EdgeDiagonal.cached(g, "e0", choose_lcut(g, t, 1e-14, "hx"))
    z, w = np.polynomial.legendre.leggauss(400)
    x = 0.5 * a * (z + 1)
    hx = ed.evaluate(t, x, "hx")
    worst = 0.0
    for n in range(1, 11):
        proj = 2 / a * math.fsum(0.5 * a * w * hx * np.sin(math.pi * n * x / a))
        c_num = proj * math.exp((math.pi * n / (2 * a)) ** 2 * t)
        worst = max(worst, abs(c_num - sine_coefficient(5, 1, a, n)))
    record("C9", "Fourier sine coefficients vs c_n, n=1..10", worst, 1e-6)
    record("C9", "c_1 - 4 pi/5", abs(sine_coefficient(5, 1, 1.0, 1) - 4 * math.pi / 5), 1e-15)


def test_c10_pde_residuals(record):
    worst_a, worst_fd, worst_spread = 0.0, 0.0, 0.0
    for g in (star_graph(5, 1.0), complete_graph(4, 1.0)):
        for t in (0.05, 0.2):
            for e in g.edges:
                for x in (0.13, 0.5, 0.81):
                    r, spread = pde_residual(g, t, e.id, x * e.length)
                    r_fd, spread_fd = pde_residual(g, t, e.id, x * e.length, method="fd")
                    worst_a = max(worst_a, abs(r))
                    worst_fd = max(worst_fd, abs(r_fd))
                    worst_spread = max(worst_spread, spread, spread_fd)
    record("C10", "(dt - dxx/4) dx h, analytic", worst_a, 1e-6)
    record("C10", "(dt - dxx/4) dx h, finite differences", worst_fd, 1e-6)
    record("C10", "x-spread of (dt - dxx/4) h", worst_spread, 1e-6)


def test_c11_poisson_theta(record):
    sig = math.acos(-1 / 3)
    worst = 0.0
    for t in np.linspace(0.05, 2.0, 20):
        for x in (0.0, 0.3, 0.77):
            worst = max(worst, *poisson_identities(1.0, sig, x, t, c=2),
                        *poisson_identities(1.0, sig, x, t, c=1),
                        theta_reduction_residual(1.0, x, t))
    record("C11", "three lattice identities and theta reduction", worst, 1e-12)


def test_c12_trace_and_semigroup(record):
    cases = [("interval", interval_graph(1.0), closed_form_spectrum("interval", 80.0)[0]),
             ("star d=3", star_graph(3, 1.0), closed_form_spectrum("star", 80.0, d=3, a=1.0)[0])]
    for name, g, spec in cases:
        worst = max(abs(integrate_diagonal(g, t) - spec.trace(t)) for t in (0.05, 0.1, 0.5))
        record("C12", f"{name}: int h = eigenvalue trace", worst, 1e-8)
        e0, e1 = g.edges[0], g.edges[-1]
        worst = 0.0
        for q1, q2 in [(GraphPoint(e0.id, 0.2), GraphPoint(e1.id, 0.7)),
                       (GraphPoint(e0.id, 0.0), GraphPoint(e0.id, 0.45))]:
            lhs, rhs = chapman_kolmogorov(g, 0.1, 0.2, q1, q2)
            worst = max(worst, abs(lhs - rhs))
        record("C12", f"{name}: Chapman-Kolmogorov", worst, 1e-7)
