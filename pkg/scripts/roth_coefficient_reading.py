"""Which coefficient goes with the k-th iterate of a primitive cycle?

Compares the cycle-sum trace under the iterate reading (coefficient of the
k-fold cycle) and the fixed reading (coefficient of the primitive cycle for
every k) against eigenvalue traces.
"""
import numpy as np

from qgheat.closed_forms import SymmetricGraphData
from qgheat.graph import complete_graph, random_graph, star_graph
from qgheat.spectral import closed_form_spectrum, secular_spectrum, symmetric_spectrum
from qgheat.traces import compare_readings

TS = np.linspace(0.05, 0.5, 6)


def main():
    k4 = complete_graph(4, 1.0)
    cases = [
        ("star d=3", star_graph(3, 1.0), closed_form_spectrum("star", 60, d=3, a=1.0)[0]),
        ("K4", k4, symmetric_spectrum(SymmetricGraphData.from_graph(k4), 60)),
        ("random", random_graph(7), secular_spectrum(random_graph(7), 60)),
    ]
    for name, g, spec in cases:
        res = compare_readings(g, TS, [spec.trace(t) for t in TS], L_max=7.0)
        print(f"{name:9} iterate {res['iterate']:.3g}   fixed {res['printed']:.3g}   "
              f"better: {res['preferred']}")


if __name__ == "__main__":
    main()
