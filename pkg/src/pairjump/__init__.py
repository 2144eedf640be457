"""Quantum-jump Monte Carlo simulation of two driven, dipole-coupled
two-level atoms with direction-resolved photon emission."""

__version__ = "0.1.0"

from ._kernels import active_backend
from .core import Direction, PhysicalParams, dicke_populations, dicke_transform, ket
from .dynamics import conditional_hamiltonian, dipole_coupling, no_jump_propagator
from .emission import apply_reset, intensity_mixed, intensity_pure, reset_operator, sample_direction
from .master import build_liouvillian, integrate, steady_state_analytic, steady_state_numeric
from .observables import bunching_map, g2_zero, interference_criterion, interference_pattern
from .trajectory import EnsembleStats, TrajectoryRecord, run_ensemble, run_trajectory

__all__ = [
    "__version__",
    "active_backend",
    "Direction",
    "PhysicalParams",
    "dicke_populations",
    "dicke_transform",
    "ket",
    "conditional_hamiltonian",
    "dipole_coupling",
    "no_jump_propagator",
    "apply_reset",
    "intensity_mixed",
    "intensity_pure",
    "reset_operator",
    "sample_direction",
    "build_liouvillian",
    "integrate",
    "steady_state_analytic",
    "steady_state_numeric",
    "bunching_map",
    "g2_zero",
    "interference_criterion",
    "interference_pattern",
    "EnsembleStats",
    "TrajectoryRecord",
    "run_ensemble",
    "run_trajectory",
]
