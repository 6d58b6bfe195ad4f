"""Powers of Hamiltonian cycles in dense graphs augmented by ``G(n, p)``.

Graph primitives, the braid/blow-up/extremal gadgets, Janson-type densities,
an exact budgeted search for ``C_n^m`` and a Monte-Carlo threshold harness.
"""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .graph import Graph, GraphError, make_graph  # noqa: E402
from .gadgets import ParameterError, ProblemParams  # noqa: E402

__all__ = ["__version__", "BACKEND", "Graph", "GraphError", "make_graph", "ParameterError", "ProblemParams"]
