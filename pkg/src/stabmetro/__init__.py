"""Local quantum-metrology protocols for graph and stabilizer states."""

from .graph import Graph, GraphError, load_graph, local_complement, twins_structure
from .pauli import PauliString, stabilizer_element
from .protocol1 import (
    attainable,
    protocol1_model,
    qfi_alpha,
    qfi_upper_bound,
    search_optimal_alpha,
)
from .protocol2 import SubspaceSpec, SubspaceState, extremal_qfi, qfi_subspace, tolerance
from .dephasing import f_dap, optimize_robust_state

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "GraphError",
    "PauliString",
    "SubspaceSpec",
    "SubspaceState",
    "attainable",
    "extremal_qfi",
    "f_dap",
    "load_graph",
    "local_complement",
    "optimize_robust_state",
    "protocol1_model",
    "qfi_alpha",
    "qfi_subspace",
    "qfi_upper_bound",
    "search_optimal_alpha",
    "stabilizer_element",
    "tolerance",
    "twins_structure",
]
