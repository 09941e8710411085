"""h(t, x) along one edge of the 5-edge star, for four times.

Writes results/fig1_star_edge.csv (x, one column per t, then certified bounds)
and prints the centre and tip values scaled by sqrt(4 pi t).
"""
import argparse
import math
from pathlib import Path

from qgheat import cli
from qgheat.graph import star_graph
from qgheat.kernel import heat_diagonal_grid

TIMES = [0.005, 0.01, 0.02, 0.05]


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="results/fig1_star_edge.csv")
    p.add_argument("--samples", type=int, default=200)
    args = p.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    g = star_graph(5, 1.0)
    cfg = cli.RunConfig("grid", t=TIMES, edge="e0", samples=args.samples)
    text, _ = cli.cmd_grid(cfg, g)
    Path(args.out).write_text(text)
    grid = heat_diagonal_grid(g, TIMES, "e0", 1)
    for j, t in enumerate(TIMES):
        r = math.sqrt(4 * math.pi * t)
        print(f"t={t:<6} centre {r * grid['values'][0, j]:.6f}  tip {r * grid['values'][-1, j]:.6f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
