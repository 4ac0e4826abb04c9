"""Fock-layer M-pod Hamiltonians, their eigenspace ladder, and adiabatic holonomies."""
from .errors import HolonomyError
from .fock import FockBasis, enumerate_layer, hop_matrix
from .loops import LoopSpec, materialize
from .mpod import CouplingPoint, DegeneracyTable, build_hamiltonian, decompose, spectrum
from .paths import ControlPath
from .transport import SubspaceSelector, express_in_frame, holonomy_numeric

__all__ = [
    "ControlPath", "CouplingPoint", "DegeneracyTable", "FockBasis", "HolonomyError", "LoopSpec",
    "SubspaceSelector", "build_hamiltonian", "decompose", "enumerate_layer", "express_in_frame",
    "holonomy_numeric", "hop_matrix", "materialize", "spectrum",
]
__version__ = "0.1.0"
