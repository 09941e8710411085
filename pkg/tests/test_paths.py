import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgheat.graph import (GraphPoint, complete_graph, interval_graph, random_graph, star_graph)
from qgheat.kernel import off_diagonal_constant
from qgheat.paths import (alpha, beta, bond_scattering_matrix, closed_sum, edge_closed_sum,
                          enumerate_edge_closed_paths, enumerate_paths,
                          enumerate_primitive_cycles, rooted_cycle_sum, truncation_bound)


def test_beta_values():
    g = star_graph(5)
    # bond 0 is c -> t0, bond 1 is t0 -> c
    assert beta(g, 1, 2) == pytest.approx(2 / 5)
    assert beta(g, 1, 0) == pytest.approx(2 / 5 - 1)
    assert beta(g, 0, 1) == 1.0       # bounce at a degree-one tip
    with pytest.raises(ValueError):
        beta(g, 0, 2)


def test_scattering_matrix_is_orthogonal_involution_per_vertex():
    for g in (star_graph(4), complete_graph(4), random_graph(3)):
        S = bond_scattering_matrix(g)
        assert np.allclose(S.sum(axis=0), 1.0, atol=1e-15)
        assert np.allclose(S.T @ S, np.eye(len(S)), atol=1e-14)


def test_interval_paths_match_images():
    # images of y=0.3 reachable from x=0.3 within length 2: |x -/+ y + 2ka|
    paths = enumerate_paths(interval_graph(1.0), GraphPoint("e", 0.3), GraphPoint("e", 0.3), 2.0)
    lengths = sorted(p.length for p in paths)
    assert lengths == pytest.approx([0.0, 0.6, 1.4, 2.0, 2.0])
    assert all(p.alpha == pytest.approx(1.0) for p in paths)


def test_trivial_path_coefficient():
    g = star_graph(5)
    p = enumerate_paths(g, GraphPoint("e0", 0.0), GraphPoint("e0", 0.0), 0.5)
    assert p[0].bonds == () and p[0].alpha == pytest.approx(2 / 5)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_centre_to_tip_constant(d):
    # the one shortest path transfers nowhere, so only the endpoint prefactor 4/(d*1) remains
    g = star_graph(d)
    c = off_diagonal_constant(g, GraphPoint("e0", 0.0), GraphPoint("e0", 1.0))
    assert c == pytest.approx(4 / d)


def test_alpha_matches_definition():
    g = star_graph(3)
    # t0 -> c -> t1: prefactor 4/(1*1), one transfer 2/3
    assert alpha(g, "t0", "t1", (1, 2)) == pytest.approx(4 * 2 / 3)


def test_primitive_cycles_k4():
    cyc = enumerate_primitive_cycles(complete_graph(4), 3.0)
    by_len = {}
    for c in cyc:
        by_len.setdefault(round(c.length), []).append(c)
    assert len(by_len[2]) == 6            # one bounce cycle per edge
    assert len(by_len[3]) == 8            # 4 triangles, 2 orientations
    assert all(c.coefficient == pytest.approx((2 / 3) ** 3) for c in by_len[3])


def _explicit_sum(items, t):
    return math.fsum(c.coefficient * math.exp(-c.length ** 2 / (4 * t)) for c in items)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 50), t=st.floats(0.05, 1.0))
def test_aggregated_sums_equal_enumeration(seed, t):
    g = random_graph(seed)
    L = 3.0
    e = g.edges[0].id
    explicit = _explicit_sum(enumerate_edge_closed_paths(g, e, L), t)
    assert edge_closed_sum(g, e, L).gaussian_sum(t) == pytest.approx(explicit, abs=1e-13)
    cyc = enumerate_primitive_cycles(g, L)
    iter_sum = math.fsum(c.coefficient ** k * c.length * math.exp(-(k * c.length) ** 2 / (4 * t))
                         for c in cyc for k in range(1, int(L / c.length + 1e-9) + 1))
    assert rooted_cycle_sum(g, L).gaussian_sum(t) == pytest.approx(iter_sum, abs=1e-12)


def test_closed_sum_lengths_sorted():
    s = closed_sum(complete_graph(4), 0, 5.0)
    assert np.all(np.diff(s.lengths) > 0)


def test_truncation_bound_monotone_and_validated():
    g = complete_graph(4)
    b = [truncation_bound(g, 0.2, L) for L in (1, 2, 4, 8)]
    assert all(x > y for x, y in zip(b, b[1:]))
    with pytest.raises(ValueError):
        truncation_bound(g, -1.0, 1.0)
    with pytest.raises(ValueError):
        enumerate_paths(g, GraphPoint("e01", 0.2), GraphPoint("e01", 0.2), -1.0)
