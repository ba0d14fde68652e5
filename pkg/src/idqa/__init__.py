"""Deterministic open-system quantum annealing simulator.

Integrates nonlinear state-vector dynamics that blend Schrodinger evolution
with a single-spin-flip thermal master equation, supports anneal-pause
schedules, and ships the spectral and fair-sampling analyses for the 8-spin
quantum-signature model.
"""

from .dynamics import DynamicsParams, StateVector, Trajectory, id_rhs, integrate
from .ising import IsingModel, build_quantum_signature, classical_spectrum
from .schedule import LINEAR_CURVES, AnnealPath, ScheduleCurves, make_pause_path

__version__ = "0.1.0"

__all__ = [
    "AnnealPath",
    "DynamicsParams",
    "IsingModel",
    "LINEAR_CURVES",
    "ScheduleCurves",
    "StateVector",
    "Trajectory",
    "build_quantum_signature",
    "classical_spectrum",
    "id_rhs",
    "integrate",
    "make_pause_path",
    "__version__",
]
