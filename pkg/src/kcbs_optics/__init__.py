"""KCBS contextuality test for optical states with threshold detectors."""

from .events import E1, E2, E3, KcbsReport, corrected_bound, efficiency_threshold, kcbs_beta
from .network import CLASSICAL_BOUND, QUANTUM_BOUND, context
from .states import Coherent, Fock, Mixture, Thermal, mixture

__all__ = [
    "CLASSICAL_BOUND", "QUANTUM_BOUND", "Coherent", "Fock", "Mixture", "Thermal",
    "E1", "E2", "E3", "KcbsReport", "context", "corrected_bound", "efficiency_threshold",
    "kcbs_beta", "mixture",
]

__version__ = "0.1.0"
