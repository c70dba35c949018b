"""Mobius energy of embedded graphs in R^3.

Numerical toolkit for the conformally invariant energy of graphs with
smooth edges: oriented-circle geometry, graph embedding and validation,
adaptive energy quadrature with a compiled kernel core, vertex intensity
analysis, toric graph construction, and a command line interface.
"""

__version__ = "1.0.0"

from . import cli, energy, geom, graph, intensity, kernels, toric

__all__ = ["cli", "energy", "geom", "graph", "intensity", "kernels",
           "toric", "__version__"]
