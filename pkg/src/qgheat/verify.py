"""Invariant checks over a fixed zoo of graphs, grouped in suites."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .closed_forms import (SymmetricGraphData, poisson_identities, symmetric_diagonal,
                           theta_reduction_residual)
from .graph import (GraphPoint, MetricGraph, complete_graph, cube_graph, flower_graph,
                    interval_graph, pumpkin_graph, random_graph, star_graph)
from .kernel import (EdgeDiagonal, choose_lcut, heat_diagonal, heat_kernel, kirchhoff_defect,
                     pde_residual)
from .paths import bond_scattering_matrix
from .spectral import (closed_form_spectrum, counting_envelope, edge_amplitudes, gram_matrix,
                       secular_spectrum, symmetric_spectrum)
from .traces import edge_trace_sides, roth_trace

SUITES = ("scattering", "kernel", "spectral", "trace", "symmetric")


def zoo() -> dict[str, MetricGraph]:
    return {
        "interval": interval_graph(1.0),
        "star3": star_graph(3, 1.0),
        "star5": star_graph(5, 1.0),
        "flower": flower_graph(0.4, 1.0),
        "K4": complete_graph(4, 1.0),
        "cube": cube_graph(1.0),
        "pumpkin3": pumpkin_graph(3, 1.0),
        "random": random_graph(7),
    }


SYMMETRIC = ("K4", "cube", "pumpkin3")
CLOSED_FORM = {"interval": ("interval", {"a": 1.0}), "star3": ("star", {"d": 3, "a": 1.0}),
               "star5": ("star", {"d": 5, "a": 1.0}), "flower": ("flower", {"a": 0.4, "L": 1.0})}


@dataclass
class Check:
    suite: str
    name: str
    graph: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, suite, name, graph, value, threshold, detail=""):
        value = float(value)
        self.checks.append(Check(suite, name, graph, value, threshold,
                                 bool(value <= threshold), detail))

    def to_dict(self) -> dict:
        return {"config": self.config, "passed": self.passed, "seconds": self.seconds,
                "n_checks": len(self.checks), "n_failed": sum(not c.passed for c in self.checks),
                "checks": [asdict(c) for c in self.checks]}


def _random_points(g: MetricGraph, rng: np.random.Generator, k: int) -> list[GraphPoint]:
    out = []
    for _ in range(k):
        e = g.edges[rng.integers(g.m)]
        out.append(GraphPoint(e.id, float(rng.uniform(0.0, e.length))))
    return out


def check_scattering(rep: Report, graphs: dict, fault: bool = False) -> None:
    for name, g in graphs.items():
        S = bond_scattering_matrix(g)
        if fault:
            b1 = 0
            b2 = int(np.flatnonzero(S[:, b1])[0])
            S[b2, b1] += 1e-3
        rep.add("scattering", "beta row sums", name, np.max(np.abs(S.sum(axis=0) - 1.0)), 1e-15)
        rep.add("scattering", "S orthogonal", name, np.max(np.abs(S.T @ S - np.eye(len(S)))), 1e-14)
    worst = 0.0
    for d in range(1, 11):
        M = 2.0 / d * np.ones((d, d)) - np.eye(d)
        worst = max(worst, float(np.max(np.abs(M @ M - np.eye(d)))))
    rep.add("scattering", "vertex matrix involution d=1..10", "-", worst, 1e-15)


def check_kernel(rep: Report, graphs: dict, rng: np.random.Generator) -> None:
    for name, g in graphs.items():
        for t in (0.05, 0.2):
            L = choose_lcut(g, t, 1e-6)
            worst = -math.inf
            for q in _random_points(g, rng, 5):
                e = g.edge(q.edge)
                h1 = EdgeDiagonal.cached(g, e.id, L).evaluate(t, q.x)[0]
                h2 = EdgeDiagonal.cached(g, e.id, 2 * L).evaluate(t, q.x)[0]
                bound = EdgeDiagonal.cached(g, e.id, L).bound(t)
                worst = max(worst, abs(h1 - h2) - bound)
            rep.add("kernel", f"truncation certified t={t}", name, worst, 0.0)
        q1, q2 = _random_points(g, rng, 2)
        t = 0.1
        rep.add("kernel", "symmetry H(q1,q2)=H(q2,q1)", name,
                abs(heat_kernel(g, t, q1, q2).value - heat_kernel(g, t, q2, q1).value), 1e-10)
        rep.add("kernel", "diagonal = kernel at q=q", name,
                abs(heat_kernel(g, t, q1, q1).value - heat_diagonal(g, t, q1).value), 1e-10)
        rep.add("kernel", "Kirchhoff defect", name,
                max(abs(kirchhoff_defect(g, t, v)) for v in g.vertices), 1e-8)
        e = g.edges[0]
        r1, spread = pde_residual(g, 0.1, e.id, 0.37 * e.length)
        rep.add("kernel", "modified heat equation for dh/dx", name, abs(r1), 1e-6)
        rep.add("kernel", "(dt - dxx/4) h independent of x", name, spread, 1e-6)


def _spectrum_for(name: str, g: MetricGraph, sigma_max: float):
    S = secular_spectrum(g, sigma_max)
    return S, edge_amplitudes(g, S)


def check_spectral(rep: Report, graphs: dict, sigma_max: float = 20.0) -> None:
    for name, g in graphs.items():
        S, A = _spectrum_for(name, g, sigma_max)
        if name in CLOSED_FORM:
            fam, kw = CLOSED_FORM[name]
            C, _ = closed_form_spectrum(fam, sigma_max, **kw)
            dev = np.max(np.abs(C.sigma - S.sigma)) if len(C) == len(S) else math.inf
            rep.add("spectral", "secular = closed form", name, dev, 1e-10, f"{len(S)} eigenvalues")
        if name in SYMMETRIC:
            Y = symmetric_spectrum(SymmetricGraphData.from_graph(g), sigma_max)
            dev = np.max(np.abs(Y.sigma - S.sigma)) if len(Y) == len(S) else math.inf
            rep.add("spectral", "secular = adjacency", name, dev, 1e-10, f"{len(S)} eigenvalues")
        J = min(20, len(S))
        rep.add("spectral", "Gram matrix of first 20", name,
                np.max(np.abs(gram_matrix(S, A, J) - np.eye(J))), 1e-8)
        rep.add("spectral", "lambda_1 = 0 simple", name, float(S.sigma[1] < 1e-9), 0.0)
        rep.add("spectral", "Weyl envelope", name, counting_envelope(S, g.total_length),
                2.0 * g.m + g.V)


def check_trace(rep: Report, graphs: dict, sigma_max: float = 40.0) -> None:
    ts = np.linspace(0.05, 1.0, 20)
    for name, g in graphs.items():
        S, A = _spectrum_for(name, g, sigma_max)
        errs = [abs(roth_trace(g, t) - S.trace(t)) / S.trace(t) for t in np.linspace(0.05, 0.5, 6)]
        rep.add("trace", "Roth = eigenvalue trace (rel)", name, max(errs), 1e-8)
        e = g.edges[0].id
        r = edge_trace_sides(g, e, ts, S, A)
        rep.add("trace", f"edge trace D(t) constant, edge {e}", name, r.max_deviation, 1e-8,
                f"c_e={r.c_e:.12g}")


def check_symmetric(rep: Report, graphs: dict) -> None:
    for name in SYMMETRIC:
        if name not in graphs:
            continue
        g = graphs[name]
        D = SymmetricGraphData.from_graph(g)
        rep.add("symmetric", "sum mu = n - 2/c", name,
                abs(sum(mu for _, mu in D.Q) - (D.n - 2 / D.c)), 0.0)
        e = g.edges[0]
        worst = 0.0
        for t in (0.05, 0.2, 1.0):
            for x in np.linspace(0, e.length, 11):
                worst = max(worst, abs(symmetric_diagonal(D, t, x)
                                       - heat_diagonal(g, t, GraphPoint(e.id, float(x))).value))
        rep.add("symmetric", "closed form = path sum", name, worst, 1e-8)
        dx = max(abs(EdgeDiagonal.cached(g, e.id, choose_lcut(g, 0.1, 1e-12, "hx"))
                     .evaluate(0.1, x, "hx")[0]) for x in (0.0, e.length))
        rep.add("symmetric", "dh/dx vanishes at vertices", name, dx, 1e-8)
    sig = math.acos(-1 / 3)
    worst = 0.0
    for t in np.linspace(0.05, 2.0, 8):
        worst = max(worst, *poisson_identities(1.0, sig, 0.3, t),
                    *poisson_identities(1.0, sig, 0.3, t, c=1), theta_reduction_residual(1.0, 0.3, t))
    rep.add("symmetric", "Poisson and theta identities", "-", worst, 1e-12)


def run(suites=SUITES, fault: bool = False, seed: int = 0, graphs: dict | None = None) -> Report:
    unknown = set(suites) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suite(s) {sorted(unknown)}; choose from {SUITES}")
    graphs = zoo() if graphs is None else graphs
    rep = Report(config={"suites": list(suites), "fault": fault, "seed": seed,
                         "graphs": sorted(graphs)})
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    if "scattering" in suites:
        check_scattering(rep, graphs, fault)
    if "kernel" in suites:
        check_kernel(rep, graphs, rng)
    if "spectral" in suites:
        check_spectral(rep, graphs)
    if "trace" in suites:
        check_trace(rep, graphs)
    if "symmetric" in suites:
        check_symmetric(rep, graphs)
    rep.seconds = time.perf_counter() - t0
    return rep
