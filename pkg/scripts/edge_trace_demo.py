"""Edge trace identity on several graphs: D(t) = spectral side - path side.

Prints the fitted constant c_e and the spread of D(t) over t in [0.05, 1].
"""
import numpy as np

from qgheat.graph import complete_graph, flower_graph, interval_graph, random_graph, star_graph
from qgheat.spectral import closed_form_spectrum, edge_amplitudes, secular_spectrum
from qgheat.traces import edge_trace_sides

TS = np.linspace(0.05, 1.0, 20)


def main():
    cases = [
        ("interval", interval_graph(1.0), closed_form_spectrum("interval", 200, a=1.0)),
        ("star d=5", star_graph(5, 1.0), closed_form_spectrum("star", 200, d=5, a=1.0)),
    ]
    for name, g in [("flower", flower_graph(0.4, 1.0)), ("K4", complete_graph(4, 1.0)),
                    ("random", random_graph(7))]:
        spec = secular_spectrum(g, 40.0)
        cases.append((name, g, (spec, edge_amplitudes(g, spec))))
    print(f"{'graph':10} {'edge':6} {'c_e':>22} {'max |D - c_e|':>14}")
    for name, g, (spec, amps) in cases:
        for e in g.edges[:3]:
            r = edge_trace_sides(g, e.id, TS, spec, amps)
            print(f"{name:10} {e.id:6} {r.c_e:22.15g} {r.max_deviation:14.3g}")


if __name__ == "__main__":
    main()
