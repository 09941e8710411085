"""Compact metric graphs with Kirchhoff-Neumann vertex conditions.

Edges carry a coordinate ``x in [0, length]`` measured from ``u`` (the
``from`` vertex in the description file).  Every edge yields two bonds:
bond ``2*i`` runs u -> v and bond ``2*i + 1`` is its reverse.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

# points closer than this (relative to the edge length) to an endpoint are vertex points
_ENDPOINT_RTOL = 1e-12


class GraphError(ValueError):
    """Invalid graph description or point."""


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: float

    @property
    def is_loop(self) -> bool:
        return self.u == self.v


@dataclass(frozen=True)
class GraphPoint:
    """A location ``x`` on edge ``edge``; use ``MetricGraph.canonical`` to compare."""

    edge: str
    x: float

    @classmethod
    def parse(cls, text: str) -> "GraphPoint":
        """Parse the command-line form ``EDGE:X``."""
        eid, sep, x = text.rpartition(":")
        if not sep or not eid:
            raise GraphError(f"point {text!r} is not of the form EDGE:X")
        try:
            return cls(eid, float(x))
        except ValueError as exc:
            raise GraphError(f"bad coordinate in point {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.edge}:{self.x:.17g}"


class MetricGraph:
    """Immutable metric graph.

    Parameters
    ----------
    vertices : iterable of str
    edges : iterable of Edge
    artificial : iterable of str
        Degree-2 vertices inserted at evaluation points.
    origin : dict, optional
        Maps each edge id to ``(original edge id, offset)`` for graphs
        produced by :func:`insert_point_vertex`.
    original_edges : iterable of Edge, optional
        The edges before any subdivision.
    """

    def __init__(self, vertices: Iterable[str], edges: Iterable[Edge],
                 artificial: Iterable[str] = (), origin: dict | None = None,
                 original_edges: Iterable[Edge] | None = None):
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        self.artificial = frozenset(artificial)
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        if not self.vertices:
            raise GraphError("graph has no vertices")
        self._vindex = {v: i for i, v in enumerate(self.vertices)}
        self._eindex: dict[str, int] = {}
        for i, e in enumerate(self.edges):
            if e.id in self._eindex:
                raise GraphError(f"duplicate edge id {e.id!r}")
            if e.u not in self._vindex or e.v not in self._vindex:
                raise GraphError(f"edge {e.id!r} references an unknown vertex")
            if not (e.length > 0 and math.isfinite(e.length)):
                raise GraphError(f"edge {e.id!r} has non-positive length {e.length}")
            self._eindex[e.id] = i
        if not self.edges:
            raise GraphError("graph has no edges")
        self.origin = dict(origin) if origin else {e.id: (e.id, 0.0) for e in self.edges}
        self.original_edges = tuple(original_edges) if original_edges is not None else self.edges

        m = len(self.edges)
        start = np.empty(2 * m, dtype=int)
        end = np.empty(2 * m, dtype=int)
        blen = np.empty(2 * m)
        for i, e in enumerate(self.edges):
            start[2 * i], end[2 * i] = self._vindex[e.u], self._vindex[e.v]
            start[2 * i + 1], end[2 * i + 1] = self._vindex[e.v], self._vindex[e.u]
            blen[2 * i] = blen[2 * i + 1] = e.length
        for arr in (start, end, blen):
            arr.setflags(write=False)
        self.bond_start, self.bond_end, self.bond_length = start, end, blen

        deg = np.zeros(len(self.vertices), dtype=int)
        np.add.at(deg, start, 1)
        deg.setflags(write=False)
        self.degree = deg
        out: list[list[int]] = [[] for _ in self.vertices]
        for b in range(2 * m):
            out[start[b]].append(b)
        self.out_bonds = tuple(tuple(o) for o in out)
        # successors[b] = ((b2, beta(b, b2)), ...) with Kirchhoff scattering
        succ = []
        for b in range(2 * m):
            d = deg[end[b]]
            succ.append(tuple((b2, 2.0 / d - (1.0 if b2 == b ^ 1 else 0.0))
                              for b2 in out[end[b]]))
        self.successors = tuple(succ)
        self._check_connected()
        self._cache: dict = {}

    # -- basic quantities -------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def V(self) -> int:
        return len(self.vertices)

    @property
    def total_length(self) -> float:
        return math.fsum(e.length for e in self.edges)

    @property
    def a0(self) -> float:
        """Minimum length over the original (unsubdivided) edges."""
        return min(e.length for e in self.original_edges)

    @property
    def n_original_edges(self) -> int:
        return len(self.original_edges)

    @property
    def n_original_vertices(self) -> int:
        return self.V - len(self.artificial)

    def vertex_index(self, v: str) -> int:
        return self._vindex[v]

    def edge_index(self, eid: str) -> int:
        try:
            return self._eindex[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def edge(self, eid: str) -> Edge:
        return self.edges[self.edge_index(eid)]

    def deg(self, v: str) -> int:
        return int(self.degree[self._vindex[v]])

    def bond_id(self, b: int) -> str:
        return self.edges[b // 2].id + ("+" if b % 2 == 0 else "-")

    @property
    def rho(self) -> float:
        """Largest total |beta| weight leaving any bond (at least 1)."""
        r = 1.0
        for d in self.degree:
            r = max(r, (d - 1) * 2.0 / d + abs(2.0 / d - 1.0))
        return r

    def _check_connected(self) -> None:
        seen = {0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for b in self.out_bonds[i]:
                j = int(self.bond_end[b])
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        if len(seen) != self.V:
            raise GraphError("graph is not connected")

    # -- points -----------------------------------------------------------
    def canonical(self, p: GraphPoint) -> tuple:
        """Hashable key: ``('v', vertex)`` for vertex points, else ``('e', edge, x)``."""
        e = self.edge(p.edge)
        x = float(p.x)
        tol = _ENDPOINT_RTOL * e.length
        if x < -tol or x > e.length + tol:
            raise GraphError(f"coordinate {x} outside [0, {e.length}] on edge {e.id!r}")
        if x <= tol:
            return ("v", e.u)
        if x >= e.length - tol:
            return ("v", e.v)
        return ("e", e.id, x)

    def same_point(self, p: GraphPoint, q: GraphPoint) -> bool:
        return self.canonical(p) == self.canonical(q)

    def relocate(self, p: GraphPoint) -> GraphPoint:
        """Express a point given on an original edge in terms of this graph's edges."""
        if p.edge in self._eindex and self.origin[p.edge] == (p.edge, 0.0):
            return p
        best = None
        for e in self.edges:
            oid, off = self.origin[e.id]
            if oid == p.edge and off - 1e-15 <= p.x <= off + e.length + 1e-15:
                best = GraphPoint(e.id, min(max(p.x - off, 0.0), e.length))
                break
        if best is None:
            raise GraphError(f"point {p} not found on this graph")
        return best

    def point_of_vertex(self, v: str) -> GraphPoint:
        b = self.out_bonds[self._vindex[v]][0]
        e = self.edges[b // 2]
        return GraphPoint(e.id, 0.0 if b % 2 == 0 else e.length)

    def distances_from(self, v: str) -> dict[str, float]:
        """Dijkstra distances from vertex ``v``."""
        import heapq

        dist = {v: 0.0}
        heap = [(0.0, v)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, math.inf):
                continue
            for b in self.out_bonds[self._vindex[u]]:
                w = self.vertices[self.bond_end[b]]
                nd = d + self.bond_length[b]
                if nd < dist.get(w, math.inf):
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        return dist

    def to_dict(self) -> dict:
        return {"vertices": list(self.vertices),
                "edges": [{"id": e.id, "from": e.u, "to": e.v, "length": e.length}
                          for e in self.edges]}

    def __repr__(self) -> str:
        return f"MetricGraph(V={self.V}, m={self.m}, L={self.total_length:.6g})"


def parse_graph(text: str) -> MetricGraph:
    """Build a graph from the JSON description document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"graph document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise GraphError('graph document needs "vertices" and "edges"')
    vertices = [str(v) for v in doc["vertices"]]
    edges = []
    for item in doc["edges"]:
        try:
            edges.append(Edge(str(item["id"]), str(item["from"]), str(item["to"]),
                              float(item["length"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed edge entry {item!r}") from exc
    return MetricGraph(vertices, edges)


def load_graph(path) -> MetricGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def insert_point_vertex(g: MetricGraph, p: GraphPoint) -> tuple[MetricGraph, str]:
    """Split the edge containing ``p`` with an artificial degree-2 vertex.

    Vertex points return ``g`` unchanged together with the existing vertex.
    """
    key = g.canonical(p)
    if key[0] == "v":
        return g, key[1]
    _, eid, x = key
    e = g.edge(eid)
    vid = f"{eid}@{x:.17g}"
    if vid in g._vindex:
        return g, vid
    oid, off = g.origin[eid]
    e0, e1 = Edge(f"{eid}|0", e.u, vid, x), Edge(f"{eid}|1", vid, e.v, e.length - x)
    edges, origin = [], {}
    for f in g.edges:
        if f.id == eid:
            edges += [e0, e1]
            origin[e0.id], origin[e1.id] = (oid, off), (oid, off + x)
        else:
            edges.append(f)
            origin[f.id] = g.origin[f.id]
    return MetricGraph(g.vertices + (vid,), edges, g.artificial | {vid}, origin,
                       g.original_edges), vid


def _original_vertices(g: MetricGraph) -> list[str]:
    return [v for v in g.vertices if v not in g.artificial]


def adjacency_matrix(g: MetricGraph) -> np.ndarray:
    """Edge-count adjacency of the original combinatorial graph (loops count 2)."""
    verts = _original_vertices(g)
    idx = {v: i for i, v in enumerate(verts)}
    A = np.zeros((len(verts), len(verts)), dtype=int)
    for e in g.original_edges:
        i, j = idx[e.u], idx[e.v]
        if i == j:
            A[i, i] += 2
        else:
            A[i, j] += 1
            A[j, i] += 1
    return A


def is_bipartite(g: MetricGraph) -> bool:
    """Two-colour the original combinatorial graph; loops make it non-bipartite."""
    verts = _original_vertices(g)
    nbrs: dict[str, list[str]] = {v: [] for v in verts}
    for e in g.original_edges:
        if e.is_loop:
            return False
        nbrs[e.u].append(e.v)
        nbrs[e.v].append(e.u)
    colour: dict[str, int] = {}
    for root in verts:
        if root in colour:
            continue
        colour[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in nbrs[u]:
                if w not in colour:
                    colour[w] = 1 - colour[u]
                    queue.append(w)
                elif colour[w] == colour[u]:
                    return False
    return True


# -- built-in families ------------------------------------------------------

def interval_graph(a: float = 1.0) -> MetricGraph:
    return MetricGraph(["0", "1"], [Edge("e", "0", "1", a)])


def star_graph(d: int, a: float = 1.0) -> MetricGraph:
    """Star with ``d`` edges of length ``a``; coordinates run outward from the centre ``c``."""
    return MetricGraph(["c"] + [f"t{i}" for i in range(d)],
                       [Edge(f"e{i}", "c", f"t{i}", a) for i in range(d)])


def flower_graph(a: float, L: float) -> MetricGraph:
    """Two loops of lengths ``a`` and ``L - a`` joined at ``v``."""
    if not 0 < a < L:
        raise GraphError("flower needs 0 < a < L")
    return MetricGraph(["v"], [Edge("p1", "v", "v", a), Edge("p2", "v", "v", L - a)])


def complete_graph(n: int, a: float = 1.0) -> MetricGraph:
    verts = [f"v{i}" for i in range(n)]
    edges = [Edge(f"e{i}{j}", verts[i], verts[j], a)
             for i in range(n) for j in range(i + 1, n)]
    return MetricGraph(verts, edges)


def cube_graph(a: float = 1.0) -> MetricGraph:
    verts = [f"v{i}" for i in range(8)]
    edges = []
    for i in range(8):
        for bit in (1, 2, 4):
            j = i ^ bit
            if i < j:
                edges.append(Edge(f"e{i}{j}", verts[i], verts[j], a))
    return MetricGraph(verts, edges)


def pumpkin_graph(k: int, a: float = 1.0) -> MetricGraph:
    """``k`` parallel edges of length ``a`` between two vertices."""
    return MetricGraph(["n", "s"], [Edge(f"e{i}", "n", "s", a) for i in range(k)])


def random_graph(seed: int = 0, n_vertices: int = 3, n_extra: int = 2,
                 lengths: tuple[float, float] = (0.6, 1.2)) -> MetricGraph:
    """Connected random graph with one loop and one doubled edge."""
    rng = np.random.default_rng(seed)
    verts = [f"r{i}" for i in range(n_vertices)]
    pairs = [(verts[i], verts[int(rng.integers(0, i))]) for i in range(1, n_vertices)]
    pairs.append((verts[0], verts[0]))
    pairs.append(pairs[0])
    for _ in range(n_extra - 2):
        i, j = rng.integers(0, n_vertices, size=2)
        pairs.append((verts[i], verts[j]))
    edges = [Edge(f"g{k}", u, v, float(rng.uniform(*lengths))) for k, (u, v) in enumerate(pairs)]
    return MetricGraph(verts, edges)
