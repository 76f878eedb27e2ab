"""Exact numerical laboratory for minimal quantum energy teleportation.

Two qubits, a transverse-field Ising Hamiltonian shifted to ground energy
zero, a one-parameter family of local measurements on A, and a feedback
rotation on B.  The package computes every quantity twice, once by brute
force on 4x4 matrices and once from closed forms, and refuses to hand back
numbers when the two routes disagree.
"""

__version__ = "0.1.0"

from . import analytic, entanglement, measurement, model, optimizer, protocol, qmath
from .model import InvalidParams, ModelParams, build_hamiltonian, ground_state

__all__ = [
    "analytic",
    "entanglement",
    "measurement",
    "model",
    "optimizer",
    "protocol",
    "qmath",
    "InvalidParams",
    "ModelParams",
    "build_hamiltonian",
    "ground_state",
    "__version__",
]
