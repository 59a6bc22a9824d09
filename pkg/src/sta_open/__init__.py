"""Counterdiabatic control construction and verification for open systems.

Given a prescribed mixed-state trajectory, build the Hermitian control, the
gain/loss operator, and the jump-operator set that transport the state along
it; propagate the equivalent generator variants; and check trajectory
tracking, generator agreement, and speed-limit bounds.
"""

from .config import DEFAULT_TOL, HBAR, TimeGrid, Tolerances
from .controls import (ComovingFrame, ControlSet, TrajectoryControls,
                       apply_dissipator, cd_hamiltonian, comoving_transform,
                       gain_loss_operator, lindblad_set,
                       reference_hamiltonian)
from .errors import (AmbiguousMatching, DegenerateSpectrum, DegenerateU,
                     GapClosure, GridMismatch, InvalidProbability,
                     InvalidState, MissingTarget, NotHermitian,
                     NotTracePreserving, OutOfRange, ShapeMismatch,
                     StaOpenError, TruncationTooSmall, ValidationError,
                     VanishingEigenvalue)
from .linalg import (bures_distance, fidelity, random_density_matrix,
                     spectral_decompose, trace_distance, trace_norm,
                     validate_state)
from .propagator import (DephasingControls, GeneratorKind, PropagationRecord,
                         StaticControls, integrate, rhs, track_error)
from .qsl import (QslReport, fisher_bound, qsl_report, trace_metric_bound,
                  triangle_check)
from .scenarios import (SCENARIO_DEFAULTS, RunConfig, ScenarioResult,
                        prescribed_record, run_scenario, validate_config)
from .schedules import Schedule, quintic_shape, quintic_shape_rate
from .trajectory import (MarchedEigenbasis, SpectralTrajectory, ThermalSpec,
                         gauge_fix, random_trajectory, thermal_trajectory)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousMatching", "ComovingFrame", "ControlSet", "DEFAULT_TOL",
    "DegenerateSpectrum", "DegenerateU", "DephasingControls", "GapClosure",
    "GeneratorKind", "GridMismatch", "HBAR", "InvalidProbability",
    "InvalidState", "MarchedEigenbasis", "MissingTarget", "NotHermitian",
    "NotTracePreserving", "OutOfRange", "PropagationRecord", "QslReport",
    "RunConfig", "SCENARIO_DEFAULTS", "Schedule", "ScenarioResult",
    "ShapeMismatch", "SpectralTrajectory", "StaOpenError", "StaticControls",
    "ThermalSpec", "TimeGrid", "Tolerances", "TrajectoryControls",
    "TruncationTooSmall", "ValidationError", "VanishingEigenvalue",
    "apply_dissipator", "bures_distance", "cd_hamiltonian",
    "comoving_transform", "fidelity", "fisher_bound", "gain_loss_operator",
    "gauge_fix", "integrate", "lindblad_set", "prescribed_record",
    "qsl_report", "quintic_shape", "quintic_shape_rate",
    "random_density_matrix", "random_trajectory", "reference_hamiltonian",
    "rhs", "run_scenario", "spectral_decompose", "thermal_trajectory",
    "trace_distance", "trace_metric_bound", "trace_norm", "track_error",
    "triangle_check", "validate_config", "validate_state",
]
