import math

import numpy as np
import pytest

from qgheat.closed_forms import SymmetricGraphData
from qgheat.graph import (GraphPoint, complete_graph, cube_graph, flower_graph, interval_graph,
                          pumpkin_graph, random_graph, star_graph)
from qgheat.kernel import heat_kernel
from qgheat.spectral import (amplitude_average, closed_form_spectrum, counting_envelope,
                             edge_amplitudes, edge_distribution_average, eigen_heat_kernel,
                             gram_matrix, local_weyl_average, secular_function, secular_spectrum,
                             symmetric_spectrum)


def test_closed_form_examples():
    s, a = closed_form_spectrum("interval", 10.0, a=1.0)
    assert s.lam[1] == pytest.approx(math.pi ** 2)
    s, a = closed_form_spectrum("star", 10.0, d=5, a=1.0)
    lv = s.levels()
    assert lv[0] == (0.0, 0.0, 1)
    assert lv[1][1] == pytest.approx((math.pi / 2) ** 2) and lv[1][2] == 4
    s, a = closed_form_spectrum("flower", 20.0, a=0.4, L=1.0)
    j = int(np.argmin(np.abs(s.sigma - 2 * math.pi / 0.6)))
    assert s.sigma[j] == pytest.approx(2 * math.pi / 0.6)
    assert a.b[j, a.column("p1")] == 0.0 and a.b[j, a.column("p2")] > 0
    with pytest.raises(ValueError):
        closed_form_spectrum("wheel", 10.0)
    with pytest.raises(ValueError):
        closed_form_spectrum("interval", 0.0)


@pytest.mark.parametrize("family,kw", [("interval", {"a": 1.0}), ("star", {"d": 3, "a": 1.0}),
                                       ("star", {"d": 5, "a": 1.0}),
                                       ("flower", {"a": 0.4, "L": 1.0})])
def test_closed_form_eigenfunctions_are_normalised_kernels(family, kw):
    spec, amps = closed_form_spectrum(family, 250.0, **kw)
    g = {"interval": lambda: interval_graph(kw.get("a", 1.0)),
         "star": lambda: star_graph(kw.get("d", 3), kw.get("a", 1.0)),
         "flower": lambda: flower_graph(kw.get("a", 1.0), kw.get("L", 1.0))}[family]()
    G = gram_matrix(spec, amps, 20)
    assert np.allclose(G, np.eye(20), atol=1e-12)
    e0, e1 = g.edges[0], g.edges[-1]
    q1, q2 = GraphPoint(e0.id, 0.3 * e0.length), GraphPoint(e1.id, 0.6 * e1.length)
    val, tail = eigen_heat_kernel(spec, amps, 0.05, q1, q2)
    assert tail < 1e-12
    assert val == pytest.approx(heat_kernel(g, 0.05, q1, q2, tol=1e-13).value, abs=1e-11)


def test_secular_matches_closed_forms_and_adjacency():
    for g, fam, kw in [(interval_graph(1.0), "interval", {"a": 1.0}),
                       (star_graph(5, 1.0), "star", {"d": 5, "a": 1.0}),
                       (flower_graph(0.4, 1.0), "flower", {"a": 0.4, "L": 1.0})]:
        S = secular_spectrum(g, 30.0)
        C, _ = closed_form_spectrum(fam, 30.0, **kw)
        assert len(S) == len(C)
        assert np.max(np.abs(S.sigma - C.sigma)) < 1e-10
    for g in (complete_graph(4), cube_graph(), pumpkin_graph(3)):
        S = secular_spectrum(g, 20.0)
        Y = symmetric_spectrum(SymmetricGraphData.from_graph(g), 20.0)
        assert len(S) == len(Y)
        assert np.max(np.abs(S.sigma - Y.sigma)) < 1e-10


def test_star_secular_multiplicity():
    S = secular_spectrum(star_graph(5), 8.0)
    lv = {round(s, 8): m for s, _, m in S.levels()}
    assert lv[round(math.pi / 2, 8)] == 4 and lv[round(math.pi, 8)] == 1


def test_k4_lattice_multiplicity():
    Y = symmetric_spectrum(SymmetricGraphData.from_graph(complete_graph(4)), 7.0)
    lv = {round(s, 8): m for s, _, m in Y.levels()}
    assert lv[round(math.pi, 8)] == 2 and lv[round(2 * math.pi, 8)] == 4
    C = symmetric_spectrum(SymmetricGraphData.from_graph(cube_graph()), 7.0)
    lv = {round(s, 8): m for s, _, m in C.levels()}
    assert lv[round(math.pi, 8)] == (3 / 2 - 1) * 8 + 2


def test_secular_amplitudes_interval_and_constant_mode():
    g = interval_graph(2.0)
    S = secular_spectrum(g, 20.0)
    A = edge_amplitudes(g, S)
    assert A.b[0, 0] == pytest.approx(1 / math.sqrt(2.0)) and A.phi[0, 0] == 0.0
    assert np.allclose(A.b[1:, 0], 1.0, atol=1e-10)
    assert np.allclose(np.minimum(A.phi[1:, 0], 2 * math.pi - A.phi[1:, 0]), 0.0, atol=1e-8)


def test_secular_star_symmetric_mode_amplitude():
    g = star_graph(5)
    S = secular_spectrum(g, 4.0)
    A = edge_amplitudes(g, S)
    j = int(np.argmin(np.abs(S.sigma - math.pi)))
    assert np.allclose(A.b[j], math.sqrt(2 / 5), atol=1e-10)


@pytest.mark.parametrize("g", [complete_graph(4), random_graph(7), flower_graph(0.3, 1.0)],
                         ids=["K4", "random", "flower"])
def test_secular_gram_identity(g):
    S = secular_spectrum(g, 25.0)
    A = edge_amplitudes(g, S)
    J = min(20, len(S))
    assert np.max(np.abs(gram_matrix(S, A, J) - np.eye(J))) < 1e-8


def test_secular_function_vanishes_at_roots():
    g = random_graph(2)
    S = secular_spectrum(g, 10.0)
    for s in S.sigma[1:6]:
        assert abs(secular_function(g, s)) < 1e-9


def test_local_weyl_and_amplitude_averages():
    spec, amps = closed_form_spectrum("star", 1300.0, d=5, a=1.0)
    assert local_weyl_average(spec, amps, GraphPoint("e0", 0.3), 1) == pytest.approx(1 / 5)
    assert local_weyl_average(spec, amps, GraphPoint("e0", 0.0), 2000) == pytest.approx(0.08, rel=0.05)
    assert amplitude_average(amps, "e2", 2000) == pytest.approx(2 / 5, rel=0.02)
    with pytest.raises(ValueError):
        amplitude_average(amps, "e0", 10 ** 6)
    with pytest.raises(ValueError):
        local_weyl_average(spec, amps, GraphPoint("e0", 0.3), 10 ** 6)


@pytest.mark.parametrize("f", [lambda x: np.ones_like(x), lambda x: x, lambda x: x ** 2,
                               lambda x: np.cos(2 * np.pi * x)],
                         ids=["one", "x", "x2", "cos"])
def test_integrated_eigenfunction_distribution(f):
    spec, amps = closed_form_spectrum("star", 650.0, d=3, a=1.0)
    x = np.linspace(0, 1, 20001)
    target = np.trapezoid(f(x), x) / 3.0
    got = edge_distribution_average(spec, amps, "e1", f, 600, n_nodes=1500)
    assert got == pytest.approx(target, abs=0.01)


def test_weyl_envelope_bounded():
    for g in (star_graph(5), complete_graph(4), random_graph(7)):
        S = secular_spectrum(g, 40.0)
        assert counting_envelope(S, g.total_length) <= g.m + g.V
