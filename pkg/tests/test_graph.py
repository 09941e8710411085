import json

import numpy as np
import pytest

from qgheat.graph import (Edge, GraphError, GraphPoint, MetricGraph, adjacency_matrix,
                          complete_graph, cube_graph, flower_graph, insert_point_vertex,
                          interval_graph, is_bipartite, parse_graph, pumpkin_graph, random_graph,
                          star_graph)


def doc(**over):
    d = {"vertices": ["a", "b"], "edges": [{"id": "e", "from": "a", "to": "b", "length": 1.5}]}
    d.update(over)
    return json.dumps(d)


def test_parse_roundtrip():
    g = parse_graph(doc())
    assert g.V == 2 and g.m == 1 and g.total_length == 1.5
    assert parse_graph(json.dumps(g.to_dict())).to_dict() == g.to_dict()


@pytest.mark.parametrize("bad", [
    doc(edges=[{"id": "e", "from": "a", "to": "b", "length": -1}]),
    doc(edges=[{"id": "e", "from": "a", "to": "b", "length": 0}]),
    doc(edges=[{"id": "e", "from": "a", "to": "z", "length": 1}]),
    doc(edges=[{"id": "e", "from": "a", "to": "b", "length": 1},
               {"id": "e", "from": "a", "to": "b", "length": 1}]),
    doc(vertices=["a", "b", "c"]),
    doc(vertices=["a", "a"]),
    doc(edges=[{"id": "e", "from": "a"}]),
    "not json",
    json.dumps({"vertices": ["a"]}),
])
def test_parse_rejects(bad):
    with pytest.raises(GraphError):
        parse_graph(bad)


def test_point_parse_and_canonical():
    g = star_graph(3, 1.0)
    p = GraphPoint.parse("e1:0.25")
    assert p == GraphPoint("e1", 0.25) and str(p) == "e1:0.25"
    assert g.canonical(GraphPoint("e0", 0.0)) == ("v", "c")
    assert g.canonical(GraphPoint("e2", 1.0)) == ("v", "t2")
    assert g.same_point(GraphPoint("e0", 0.0), GraphPoint("e2", 0.0))
    with pytest.raises(GraphError):
        g.canonical(GraphPoint("e0", 1.5))
    with pytest.raises(GraphError):
        g.canonical(GraphPoint("nope", 0.5))
    with pytest.raises(GraphError):
        GraphPoint.parse("e0")


def test_degrees_and_loops():
    g = flower_graph(0.4, 1.0)
    assert g.deg("v") == 4 and all(e.is_loop for e in g.edges)
    r = random_graph(7)
    assert any(e.is_loop for e in r.edges)
    assert sum(r.degree) == 2 * r.m


def test_insert_point_vertex_is_spectrally_invisible():
    g = star_graph(3, 1.0)
    g2, v = insert_point_vertex(g, GraphPoint("e1", 0.3))
    assert g2.deg(v) == 2 and v in g2.artificial
    assert g2.m == g.m + 1 and g2.total_length == pytest.approx(g.total_length)
    assert g2.n_original_edges == g.m and g2.n_original_vertices == g.V
    assert g2.relocate(GraphPoint("e1", 0.8)) == GraphPoint("e1|1", pytest.approx(0.5))
    same, vc = insert_point_vertex(g, GraphPoint("e0", 0.0))
    assert same is g and vc == "c"


def test_adjacency_and_bipartite():
    assert not is_bipartite(complete_graph(4))
    assert is_bipartite(cube_graph())
    assert is_bipartite(pumpkin_graph(3))
    assert not is_bipartite(flower_graph(0.3, 1.0))
    A = adjacency_matrix(complete_graph(4))
    assert np.array_equal(A, np.ones((4, 4)) - np.eye(4))
    assert adjacency_matrix(flower_graph(0.3, 1.0))[0, 0] == 4
    assert adjacency_matrix(pumpkin_graph(3))[0, 1] == 3


def test_distances():
    g = star_graph(3, 2.0)
    d = g.distances_from("t0")
    assert d["c"] == 2.0 and d["t2"] == 4.0


def test_graph_is_read_only():
    g = interval_graph()
    with pytest.raises(ValueError):
        g.bond_length[0] = 3.0
