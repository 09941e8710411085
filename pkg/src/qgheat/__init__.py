"""Heat kernels on compact metric graphs with Kirchhoff-Neumann vertex conditions."""
from .graph import (Edge, GraphError, GraphPoint, MetricGraph, complete_graph, cube_graph,
                    flower_graph, interval_graph, load_graph, parse_graph, pumpkin_graph,
                    random_graph, star_graph)
from .kernel import (KernelValue, TruncationError, heat_diagonal, heat_diagonal_grid,
                     heat_kernel, small_time_approx)
from .spectral import (EdgeAmplitude, Spectrum, closed_form_spectrum, edge_amplitudes,
                       secular_spectrum, symmetric_spectrum)
from .traces import EdgeTraceReport, edge_trace_sides, roth_trace

__version__ = "0.1.0"
