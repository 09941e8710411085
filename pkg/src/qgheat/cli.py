"""Command-line entry point: ``qgheat <subcommand> [options]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import verify as verify_mod
from .closed_forms import SymmetricGraphData
from .graph import GraphError, GraphPoint, MetricGraph, is_bipartite, load_graph
from .kernel import (DEFAULT_TOL, EdgeDiagonal, TruncationError, choose_lcut, heat_kernel,
                     kernel_row)
from .paths import truncation_bound
from .spectral import edge_amplitudes, secular_spectrum, symmetric_spectrum
from .traces import edge_trace_sides, roth_trace


@dataclass
class RunConfig:
    command: str
    graph: str | None = None
    point: str | None = None
    point2: str | None = None
    t: list[float] = field(default_factory=list)
    edge: str | None = None
    tol: float = DEFAULT_TOL
    lcut: float | None = None
    samples: int = 200
    sigma_max: float = 40.0
    method: str = "secular"
    out: str | None = None
    format: str = "csv"
    suite: list[str] = field(default_factory=list)
    fault: bool = False
    workers: int = 1


def fmt(v) -> str:
    return format(float(v), ".17g")


def parse_times(text: str) -> list[float]:
    """``"0.1,0.2"`` or ``"A:B:N"`` (N evenly spaced values from A to B)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad t range {text!r}, expected A:B:N")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        ts = list(np.linspace(a, b, n))
    else:
        ts = [float(s) for s in text.split(",") if s.strip()]
    if not ts or any(not (t > 0 and math.isfinite(t)) for t in ts):
        raise ValueError("t values must be positive and finite")
    return [float(t) for t in ts]


def parse_lcut(text: str) -> float | None:
    if text == "auto":
        return None
    v = float(text)
    if not v > 0:
        raise ValueError("--lcut must be positive or 'auto'")
    return v


def _check_point(g: MetricGraph, text: str | None, flag: str) -> GraphPoint:
    if text is None:
        raise GraphError(f"{flag} is required")
    p = GraphPoint.parse(text)
    g.canonical(p)
    return p


def _emit(cfg: RunConfig, header: list[str], rows: list[list], extra: dict | None = None) -> str:
    if cfg.format == "json":
        payload = {"config": asdict(cfg), "columns": header,
                   "rows": [[float(v) for v in r] for r in rows]}
        if extra:
            payload.update(extra)
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
        text = buf.getvalue()
    return text


def cmd_validate(cfg: RunConfig, g: MetricGraph) -> tuple[str, int]:
    info = {"vertices": g.V, "edges": g.m, "total_length": g.total_length, "min_edge": g.a0,
            "degrees": {v: g.deg(v) for v in g.vertices},
            "loops": [e.id for e in g.edges if e.is_loop], "bipartite": is_bipartite(g)}
    return json.dumps({"config": asdict(cfg), "valid": True, "graph": info}, indent=2) + "\n", 0


def _lcut(cfg: RunConfig, g: MetricGraph, t: float, kind: str = "h") -> float:
    return cfg.lcut if cfg.lcut is not None else choose_lcut(g, t, cfg.tol, kind)


def cmd_heat(cfg: RunConfig, g: MetricGraph) -> tuple[str, int]:
    q1 = _check_point(g, cfg.point, "--point")
    q2 = _check_point(g, cfg.point2, "--point2") if cfg.point2 else q1
    rows = []
    for t in cfg.t:
        if cfg.lcut is None:
            kv = heat_kernel(g, t, q1, q2, cfg.tol)
            rows.append([t, kv.value, kv.error_bound, kv.L_cut])
        else:
            e, x = _edge_coord(g, q2)
            val = kernel_row(g, t, q1, e, [x], cfg.lcut)[0]
            rows.append([t, val, truncation_bound(g, t, cfg.lcut), cfg.lcut])
    return _emit(cfg, ["t", "H", "error_bound", "L_cut"], rows), 0


def _edge_coord(g: MetricGraph, q: GraphPoint) -> tuple[str, float]:
    key = g.canonical(q)
    if key[0] == "v":
        p = g.point_of_vertex(key[1])
        return p.edge, p.x
    return key[1], key[2]


def cmd_grid(cfg: RunConfig, g: MetricGraph) -> tuple[str, int]:
    if cfg.edge is None:
        raise GraphError("--edge is required")
    e = g.edge(cfg.edge)
    xs = np.linspace(0.0, e.length, cfg.samples)

    def column(t):
        L = _lcut(cfg, g, t)
        ed = EdgeDiagonal.cached(g, e.id, L)
        return ed.evaluate(t, xs), ed.bound(t)

    # each column is computed independently; results are assembled in t order
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        cols = list(pool.map(column, cfg.t))
    header = ["x"] + [f"t={fmt(t)}" for t in cfg.t] + [f"bound@t={fmt(t)}" for t in cfg.t]
    rows = [[x] + [c[0][i] for c in cols] + [c[1] for c in cols] for i, x in enumerate(xs)]
    return _emit(cfg, header, rows), 0


def _spectrum(cfg: RunConfig, g: MetricGraph):
    if cfg.method == "symmetric":
        return symmetric_spectrum(SymmetricGraphData.from_graph(g), cfg.sigma_max)
    return secular_spectrum(g, cfg.sigma_max)


def cmd_spectrum(cfg: RunConfig, g: MetricGraph) -> tuple[str, int]:
    spec = _spectrum(cfg, g)
    rows = [[s, lam, mu] for s, lam, mu in spec.levels()]
    return _emit(cfg, ["sigma", "lambda", "multiplicity"], rows, {"source": spec.source}), 0


def cmd_trace(cfg: RunConfig, g: MetricGraph) -> tuple[str, int]:
    spec = _spectrum(cfg, g)
    rows = []
    for t in cfg.t:
        r, s = roth_trace(g, t, tol=min(cfg.tol, 1e-12)), spec.trace(t)
        rows.append([t, r, s, abs(r - s) / abs(s)])
    return _emit(cfg, ["t", "cycle_trace", "eigen_trace", "rel_diff"], rows), 0


def cmd_edge_trace(cfg: RunConfig, g: MetricGraph) -> tuple[str, int]:
    if cfg.edge is None:
        raise GraphError("--edge is required")
    g.edge(cfg.edge)
    spec = secular_spectrum(g, cfg.sigma_max)
    amps = edge_amplitudes(g, spec)
    rep = edge_trace_sides(g, cfg.edge, cfg.t, spec, amps, L_max=cfg.lcut,
                           tol=max(cfg.tol, 1e-12))
    rows = [[r["t"], r["lhs"], r["rhs"], r["D"], rep.c_e, rep.max_deviation] for r in rep.rows()]
    extra = {"c_e": rep.c_e, "max_deviation": rep.max_deviation}
    return _emit(cfg, ["t", "lhs", "rhs", "D", "c_e", "max_deviation"], rows, extra), 0


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    rep = verify_mod.run(cfg.suite or verify_mod.SUITES, fault=cfg.fault)
    payload = rep.to_dict()
    payload["config"] = {**payload["config"], "run": asdict(cfg)}
    return json.dumps(payload, indent=2) + "\n", 0 if rep.passed else 1


COMMANDS = {"validate": cmd_validate, "heat": cmd_heat, "grid": cmd_grid,
            "spectrum": cmd_spectrum, "trace": cmd_trace, "edge-trace": cmd_edge_trace}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgheat", description="Heat kernels on metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", required=True, help="graph JSON file")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    timed = argparse.ArgumentParser(add_help=False)
    timed.add_argument("--t", required=True, type=parse_times, help="LIST or A:B:N")
    timed.add_argument("--lcut", type=parse_lcut, default=None, help="FLOAT or auto")
    spec = argparse.ArgumentParser(add_help=False)
    spec.add_argument("--sigma-max", type=float, default=40.0)
    spec.add_argument("--method", choices=("secular", "symmetric"), default="secular")

    sub.add_parser("validate", parents=[common])
    s = sub.add_parser("heat", parents=[common, timed])
    s.add_argument("--point", required=True, help="EDGE:X")
    s.add_argument("--point2", help="EDGE:X (defaults to --point)")
    s = sub.add_parser("grid", parents=[common, timed])
    s.add_argument("--edge", required=True)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--workers", type=int, default=1)
    sub.add_parser("spectrum", parents=[common, spec])
    sub.add_parser("trace", parents=[common, spec, timed])
    s = sub.add_parser("edge-trace", parents=[common, spec, timed])
    s.add_argument("--edge", required=True)
    s = sub.add_parser("verify")
    s.add_argument("--suite", action="append", choices=verify_mod.SUITES)
    s.add_argument("--fault", action="store_true", help="perturb one beta by 1e-3")
    s.add_argument("--out")
    return p


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    opts = {k.replace("-", "_"): v for k, v in vars(ns).items() if v is not None}
    cfg = RunConfig(**{k: v for k, v in opts.items() if k in RunConfig.__dataclass_fields__})
    if not cfg.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    try:
        if cfg.command == "verify":
            text, code = cmd_verify(cfg)
        else:
            g = load_graph(cfg.graph)
            text, code = COMMANDS[cfg.command](cfg, g)
    except (GraphError, TruncationError, ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
