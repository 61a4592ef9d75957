"""Constraint-space Meyer-Miller mapping dynamics for spin-boson models."""

from .bath import Debye, DiscretizedBath, Ohmic, discretize, sample_wigner_thermal
from .dynamics import IntegratorConfig, SpinBosonSystem, TrajectoryState, default_dt, propagate
from .estimators import (
    TooManyAbortsError,
    ehrenfest_population,
    estimate_correlation,
    estimate_population,
)
from .mapping import ElectronicPhasePoint, MappingSpace, inverse_kernel, kernel
from .sampling import rng_stream, sample_uniform_constraint

__all__ = [
    "Debye",
    "DiscretizedBath",
    "ElectronicPhasePoint",
    "IntegratorConfig",
    "MappingSpace",
    "Ohmic",
    "SpinBosonSystem",
    "TooManyAbortsError",
    "TrajectoryState",
    "default_dt",
    "discretize",
    "ehrenfest_population",
    "estimate_correlation",
    "estimate_population",
    "inverse_kernel",
    "kernel",
    "propagate",
    "rng_stream",
    "sample_uniform_constraint",
    "sample_wigner_thermal",
]
