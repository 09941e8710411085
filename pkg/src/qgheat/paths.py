"""Bond paths, scattering coefficients and truncated path/loop sums.

Two views of the same path set are provided.  The ``enumerate_*``
functions return explicit :class:`BondPath` / :class:`CycleClass` lists and
are meant for inspection and testing.  The ``*_sum`` functions aggregate
coefficients by length with a layered walk over bonds and are what the
kernel evaluators use; they never materialise individual paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphPoint, MetricGraph, insert_point_vertex

# lengths are merged when they agree to this resolution
_LENGTH_QUANTUM = 1e-11


@dataclass(frozen=True)
class BondPath:
    start: str
    end: str
    bonds: tuple[str, ...]
    length: float
    alpha: float


@dataclass(frozen=True)
class CycleClass:
    bonds: tuple[str, ...]
    length: float
    coefficient: float
    primitive: bool = True


@dataclass(frozen=True)
class LengthSum:
    """Coefficients aggregated by path length, sorted by ascending length."""

    lengths: np.ndarray
    coeffs: np.ndarray

    def __len__(self) -> int:
        return len(self.lengths)

    def gaussian_sum(self, t: float, shift: float = 0.0) -> float:
        """``sum_p c_p exp(-(shift + l_p)^2 / 4t)`` with exactly rounded summation."""
        y = self.lengths + shift
        return math.fsum(self.coeffs * np.exp(-y * y / (4.0 * t)))


def beta(g: MetricGraph, b1: int, b2: int) -> float:
    """Vertex scattering weight for stepping from bond ``b1`` into ``b2``."""
    if g.bond_end[b1] != g.bond_start[b2]:
        raise ValueError(f"bonds {g.bond_id(b1)} and {g.bond_id(b2)} are not consecutive")
    d = int(g.degree[g.bond_end[b1]])
    return 2.0 / d - (1.0 if b2 == b1 ^ 1 else 0.0)


def bond_scattering_matrix(g: MetricGraph) -> np.ndarray:
    """``S[b2, b1] = beta(b1, b2)`` for consecutive bonds, zero otherwise."""
    n = 2 * g.m
    S = np.zeros((n, n))
    for b1 in range(n):
        for b2, w in g.successors[b1]:
            S[b2, b1] = w
    return S


def alpha(g: MetricGraph, start: str, end: str, bonds: tuple[int, ...]) -> float:
    """Path coefficient; the empty bond tuple is the trivial path at ``start``."""
    if not bonds:
        return 2.0 / g.deg(start)
    c = 4.0 / (g.deg(start) * g.deg(end))
    for b1, b2 in zip(bonds[:-1], bonds[1:]):
        c *= beta(g, b1, b2)
    return c


def cyclic_coefficient(g: MetricGraph, bonds: tuple[int, ...]) -> float:
    """Product of beta over consecutive pairs including the wrap-around pair."""
    c = 1.0
    for i, b1 in enumerate(bonds):
        c *= beta(g, b1, bonds[(i + 1) % len(bonds)])
    return c


def _check_lmax(L_max: float) -> None:
    if not L_max >= 0:
        raise ValueError(f"L_max must be non-negative, got {L_max}")


# -- explicit enumeration ---------------------------------------------------

def _dfs(g: MetricGraph, first_bonds, L_max: float, visit, min_bond: int = 0) -> None:
    """Depth-first walk over bonds; ``visit(bonds, length, partial)`` sees every prefix.

    ``partial`` is the beta product over the prefix.  Prefixes whose product is
    exactly zero are pruned.
    """
    stack = [((b,), g.bond_length[b], 1.0) for b in reversed(first_bonds)
             if g.bond_length[b] <= L_max]
    while stack:
        bonds, length, partial = stack.pop()
        visit(bonds, length, partial)
        last = bonds[-1]
        for b2, w in reversed(g.successors[last]):
            nl = length + g.bond_length[b2]
            if w != 0.0 and nl <= L_max and b2 >= min_bond:
                stack.append((bonds + (b2,), nl, partial * w))


def enumerate_paths(g: MetricGraph, q1: GraphPoint, q2: GraphPoint,
                    L_max: float) -> list[BondPath]:
    """All paths from ``q1`` to ``q2`` of length at most ``L_max``.

    Artificial vertices are inserted at interior points; paths bouncing at them
    carry a zero coefficient and are omitted.  Bond ids refer to the
    subdivided graph.
    """
    _check_lmax(L_max)
    g1, v1 = insert_point_vertex(g, q1)
    g2, v2 = insert_point_vertex(g1, g1.relocate(q2))
    i2 = g2.vertex_index(v2)
    pref = 4.0 / (g2.deg(v1) * g2.deg(v2))
    out: list[BondPath] = []
    if v1 == v2:
        out.append(BondPath(v1, v2, (), 0.0, 2.0 / g2.deg(v1)))

    def visit(bonds, length, partial):
        if g2.bond_end[bonds[-1]] == i2:
            out.append(BondPath(v1, v2, tuple(g2.bond_id(b) for b in bonds),
                                float(length), pref * partial))

    _dfs(g2, g2.out_bonds[g2.vertex_index(v1)], L_max, visit)
    out.sort(key=lambda p: (p.length, p.bonds))
    return out


def _edge_bonds(g: MetricGraph, edge: str) -> tuple[int, int]:
    i = g.edge_index(edge)
    return 2 * i, 2 * i + 1


def enumerate_edge_closed_paths(g: MetricGraph, edge: str, L_max: float) -> list[CycleClass]:
    """Closed paths starting with a bond of ``edge``, plus the trivial path (coefficient 1)."""
    _check_lmax(L_max)
    out = [CycleClass((), 0.0, 1.0, True)]
    for b0 in _edge_bonds(g, edge):
        s0 = g.bond_start[b0]

        def visit(bonds, length, partial, b0=b0, s0=s0):
            last = bonds[-1]
            if g.bond_end[last] == s0:
                c = partial * beta(g, last, b0)
                if c != 0.0:
                    out.append(CycleClass(tuple(g.bond_id(b) for b in bonds), float(length), c,
                                          _is_primitive(bonds)))

        _dfs(g, [b0], L_max, visit)
    out.sort(key=lambda c: (c.length, c.bonds))
    return out


def _is_primitive(bonds: tuple) -> bool:
    n = len(bonds)
    for p in range(1, n):
        if n % p == 0 and bonds == bonds[:p] * (n // p):
            return False
    return True


def _min_rotation(bonds: tuple) -> tuple:
    return min(bonds[i:] + bonds[:i] for i in range(len(bonds)))


def enumerate_primitive_cycles(g: MetricGraph, L_max: float) -> list[CycleClass]:
    """One representative (the least rotation) per primitive cycle class."""
    _check_lmax(L_max)
    out: list[CycleClass] = []
    for b0 in range(2 * g.m):
        s0 = g.bond_start[b0]

        def visit(bonds, length, partial, b0=b0, s0=s0):
            last = bonds[-1]
            if g.bond_end[last] != s0:
                return
            c = partial * beta(g, last, b0)
            if c != 0.0 and _is_primitive(bonds) and _min_rotation(bonds) == bonds:
                out.append(CycleClass(tuple(g.bond_id(b) for b in bonds), float(length), c, True))

        _dfs(g, [b0], L_max, visit, min_bond=b0)
    out.sort(key=lambda c: (c.length, c.bonds))
    return out


# -- aggregated sums --------------------------------------------------------

def _merge(acc: dict, length: float, coeff: float) -> None:
    key = round(length / _LENGTH_QUANTUM)
    slot = acc.get(key)
    if slot is None:
        acc[key] = [length, coeff]
    else:
        slot[1] += coeff


def _to_sum(acc: dict) -> LengthSum:
    items = sorted(acc.values(), key=lambda s: s[0])
    items = [s for s in items if s[1] != 0.0]
    return LengthSum(np.array([s[0] for s in items], dtype=float),
                     np.array([s[1] for s in items], dtype=float))


def walk_layers(g: MetricGraph, seeds, L_max: float):
    """Yield successive frontiers ``{(bond, key): [length, coeff]}``.

    ``seeds`` is an iterable of ``(bond, length, coeff)``.  Each step appends
    one bond, multiplies by its scattering weight and merges equal lengths.
    Zero-weight steps and steps exceeding ``L_max`` are dropped.
    """
    frontier: dict = {}
    for b, length, c in seeds:
        if length <= L_max and c != 0.0:
            key = (b, round(length / _LENGTH_QUANTUM))
            slot = frontier.setdefault(key, [length, 0.0])
            slot[1] += c
    blen = g.bond_length
    while frontier:
        yield frontier
        nxt: dict = {}
        for (b, _), (length, c) in sorted(frontier.items()):
            for b2, w in g.successors[b]:
                if w == 0.0:
                    continue
                nl = length + blen[b2]
                if nl > L_max:
                    continue
                key = (b2, round(nl / _LENGTH_QUANTUM))
                slot = nxt.get(key)
                if slot is None:
                    nxt[key] = [nl, c * w]
                else:
                    slot[1] += c * w
        frontier = nxt


def closed_sum(g: MetricGraph, b0: int, L_max: float) -> LengthSum:
    """Cyclic coefficients of closed paths beginning with bond ``b0``, by length."""
    acc: dict = {}
    s0 = g.bond_start[b0]
    for layer in walk_layers(g, [(b0, g.bond_length[b0], 1.0)], L_max):
        for (b, _), (length, c) in layer.items():
            if g.bond_end[b] == s0:
                w = beta(g, b, b0)
                if w != 0.0:
                    _merge(acc, length, c * w)
    return _to_sum(acc)


def edge_closed_sum(g: MetricGraph, edge: str, L_max: float) -> LengthSum:
    """Aggregated form of :func:`enumerate_edge_closed_paths`."""
    _check_lmax(L_max)
    acc: dict = {}
    _merge(acc, 0.0, 1.0)
    for b0 in _edge_bonds(g, edge):
        s = closed_sum(g, b0, L_max)
        for length, c in zip(s.lengths, s.coeffs):
            _merge(acc, float(length), float(c))
    return _to_sum(acc)


def return_sum(g: MetricGraph, b_in: int, L_max: float) -> LengthSum:
    """Closed walks ``W`` at the vertex reached by ``b_in`` weighted as ``b_in, W, reverse(b_in)``.

    The empty walk contributes the bounce weight at length 0.  These are the
    x-dependent loops of the diagonal kernel: a point at distance ``x`` from
    that vertex sees them at lengths ``2x + l(W)``.
    """
    _check_lmax(L_max)
    v = g.bond_end[b_in]
    b_out = b_in ^ 1
    acc: dict = {}
    _merge(acc, 0.0, beta(g, b_in, b_out))
    seeds = [(b, g.bond_length[b], w) for b, w in g.successors[b_in]]
    for layer in walk_layers(g, seeds, L_max):
        for (b, _), (length, c) in layer.items():
            if g.bond_end[b] == v:
                _merge(acc, length, c * beta(g, b, b_out))
    return _to_sum(acc)


def rooted_cycle_sum(g: MetricGraph, L_max: float) -> LengthSum:
    """``sum over closed bond sequences of l(first bond) * cyclic coefficient``.

    Grouping the rotations of each iterate shows this equals the cycle sum
    over primitive classes with iterate coefficients; it is the aggregated
    counterpart of :func:`enumerate_primitive_cycles`.
    """
    _check_lmax(L_max)
    acc: dict = {}
    for b0 in range(2 * g.m):
        s = closed_sum(g, b0, L_max)
        for length, c in zip(s.lengths, s.coeffs):
            _merge(acc, float(length), float(c) * g.bond_length[b0])
    return _to_sum(acc)


@dataclass(frozen=True)
class Arrivals:
    """Walks leaving ``source`` in a graph where ``source`` is a vertex.

    ``by_bond[b]`` holds the aggregated walks whose last bond is ``b``; the
    start prefactor ``2/deg(source)`` is already applied.
    """

    graph: MetricGraph
    source: str
    by_bond: dict
    L_max: float


def arrivals(g: MetricGraph, q: GraphPoint, L_max: float) -> Arrivals:
    _check_lmax(L_max)
    g1, v = insert_point_vertex(g, q)
    pref = 2.0 / g1.deg(v)
    seeds = [(b, g1.bond_length[b], pref) for b in g1.out_bonds[g1.vertex_index(v)]]
    acc: dict = {}
    for layer in walk_layers(g1, seeds, L_max):
        for (b, _), (length, c) in layer.items():
            _merge(acc.setdefault(b, {}), length, c)
    return Arrivals(g1, v, {b: _to_sum(a) for b, a in acc.items()}, L_max)


# -- truncation -------------------------------------------------------------

def _monomial_sup(p: int, ell, t: float):
    """``sup_{s >= ell} s^p exp(-s^2/4t)``."""
    s = np.maximum(ell, math.sqrt(2.0 * p * t))
    return s ** p * np.exp(-s * s / (4.0 * t))


def truncation_bound(g: MetricGraph, t: float, L_cut: float,
                     moments: dict[int, float] | None = None) -> float:
    """Upper bound on ``(4 pi t)^(-1/2) sum |term|`` over all paths longer than ``L_cut``.

    A path through ``k`` full edges of the original graph has length at least
    ``k * a0`` and, summed over all such paths, ``|alpha| <= 4 rho^(k+1)`` where
    ``rho`` is the largest |beta|-weighted branching (at most 3).  ``moments``
    maps powers ``p`` to coefficients ``c_p`` so that each term is bounded by
    ``|alpha| sum_p c_p l^p exp(-l^2/4t)``; the default is the plain Gaussian.
    The series over ``k`` is summed explicitly until its ratio drops below 1,
    after which a geometric majorant closes it.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if not L_cut >= 0:
        raise ValueError("L_cut must be non-negative")
    moments = moments or {0: 1.0}
    rho, a0 = g.rho, g.a0

    def w(ell):
        return math.fsum(c * float(_monomial_sup(p, ell, t)) for p, c in moments.items())

    k0 = int(math.floor(L_cut / a0))
    head = math.fsum(rho ** k for k in range(k0 + 1)) * w(L_cut)
    terms = []
    k = k0 + 1
    prev = rho ** k * w(k * a0)
    while True:
        terms.append(prev)
        k += 1
        cur = rho ** k * w(k * a0)
        ratio = cur / prev if prev > 0 else 0.0
        if prev == 0.0 or (ratio < 0.5 and cur < 1e-300 + 1e-17 * math.fsum(terms)):
            if ratio < 1.0 and prev > 0.0:
                terms.append(cur / (1.0 - ratio))
            break
        if k > k0 + 100000:
            raise RuntimeError("truncation series did not settle")
        prev = cur
    tail = math.fsum(terms)
    return 4.0 * rho * (head + tail) / math.sqrt(4.0 * math.pi * t)
