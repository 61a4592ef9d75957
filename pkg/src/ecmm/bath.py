"""Harmonic bath: spectral densities, discretisation and thermal Wigner sampling.

All coordinates are mass-weighted (unit masses) in atomic units with hbar = 1.
Zero temperature is requested with ``beta = math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Ohmic",
    "Debye",
    "DiscretizedBath",
    "BathPhasePoint",
    "discretize",
    "reorg_energy_discrete",
    "reorg_energy_continuous",
    "thermal_wigner_variances",
    "sample_wigner_thermal",
    "wigner_sampler",
    "DEFAULT_N_MODES",
]

DEFAULT_N_MODES = 300


def _positive(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class Ohmic:
    """J(w) = (pi/2) alpha w exp(-w/wc)."""

    alpha: float
    omega_c: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "omega_c", _positive("omega_c", self.omega_c))

    def J(self, omega):
        return 0.5 * np.pi * self.alpha * omega * np.exp(-omega / self.omega_c)

    def reorganization_energy(self) -> float:
        return 0.5 * self.alpha * self.omega_c

    def number_density(self, omega, n_modes: int):
        return (n_modes + 1) * np.exp(-omega / self.omega_c) / self.omega_c

    def mode_count(self, omega, n_modes: int):
        """Number of modes below ``omega``; equals j at the j-th frequency."""
        return (n_modes + 1) * -np.expm1(-omega / self.omega_c)

    def frequencies(self, n_modes: int) -> np.ndarray:
        j = np.arange(1, n_modes + 1)
        return -self.omega_c * np.log1p(-j / (1.0 + n_modes))

    def couplings(self, omega, n_modes: int) -> np.ndarray:
        return omega * np.sqrt(self.alpha * self.omega_c / (1.0 + n_modes))


@dataclass(frozen=True)
class Debye:
    """J(w) = 2 lambda wc w / (wc^2 + w^2)."""

    reorg_lambda: float
    omega_c: float

    def __post_init__(self):
        object.__setattr__(self, "reorg_lambda", _positive("reorg_lambda", self.reorg_lambda))
        object.__setattr__(self, "omega_c", _positive("omega_c", self.omega_c))

    def J(self, omega):
        return 2.0 * self.reorg_lambda * self.omega_c * omega / (self.omega_c**2 + omega**2)

    def reorganization_energy(self) -> float:
        return self.reorg_lambda

    def number_density(self, omega, n_modes: int):
        return (n_modes + 1) * (2.0 * self.omega_c / np.pi) / (omega**2 + self.omega_c**2)

    def mode_count(self, omega, n_modes: int):
        # frequencies are generated in decreasing order, so mode j has j modes above it
        return (n_modes + 1) * (1.0 - 2.0 / np.pi * np.arctan(omega / self.omega_c))

    def frequencies(self, n_modes: int) -> np.ndarray:
        j = np.arange(1, n_modes + 1)
        return self.omega_c * np.tan(0.5 * np.pi * (1.0 - j / (1.0 + n_modes)))

    def couplings(self, omega, n_modes: int) -> np.ndarray:
        return omega * np.sqrt(2.0 * self.reorg_lambda / (1.0 + n_modes))


SpectralDensity = Union[Ohmic, Debye]


@dataclass(frozen=True)
class DiscretizedBath:
    omega: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if omega.ndim != 1 or omega.shape != c.shape:
            raise ValueError("omega and c must be 1-d arrays of equal length")
        if np.any(omega <= 0.0):
            raise ValueError("bath frequencies must be positive")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "c", c)

    @property
    def n_modes(self) -> int:
        return self.omega.size

    @property
    def omega_max(self) -> float:
        return float(self.omega.max())


@dataclass(frozen=True)
class BathPhasePoint:
    R: np.ndarray
    P: np.ndarray


def discretize(sd: SpectralDensity, n_modes: int = DEFAULT_N_MODES) -> DiscretizedBath:
    """Split the reorganisation energy into ``n_modes`` equal segments.

    Each mode carries lambda_cont / (n_modes + 1), so the discrete
    reorganisation energy is n_modes/(n_modes + 1) of the continuous one.
    """
    if int(n_modes) != n_modes or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    n_modes = int(n_modes)
    omega = sd.frequencies(n_modes)
    return DiscretizedBath(omega, sd.couplings(omega, n_modes))


def reorg_energy_discrete(bath: DiscretizedBath) -> float:
    return float(np.sum(bath.c**2 / (2.0 * bath.omega**2)))


def reorg_energy_continuous(sd: SpectralDensity) -> float:
    return sd.reorganization_energy()


def _check_beta(beta):
    beta = float(beta)
    if not beta > 0.0:
        raise ValueError(f"beta must be positive (math.inf for zero temperature), got {beta!r}")
    return beta


def thermal_wigner_variances(omega, beta):
    """Widths of the Wigner function of a thermal harmonic oscillator.

    Returns ``(var_R, var_P)`` with var_R = coth(beta w/2)/(2w) and
    var_P = w coth(beta w/2)/2.
    """
    beta = _check_beta(beta)
    omega = np.asarray(omega, dtype=float)
    coth = 1.0 if math.isinf(beta) else 1.0 / np.tanh(0.5 * beta * omega)
    return coth / (2.0 * omega), omega * coth / 2.0


def sample_wigner_thermal(bath: DiscretizedBath, beta, rng: np.random.Generator, size: int | None = None):
    """Independent Gaussian draws for every mode from the thermal Wigner density."""
    var_R, var_P = thermal_wigner_variances(bath.omega, beta)
    shape = (bath.n_modes,) if size is None else (size, bath.n_modes)
    R = rng.standard_normal(shape) * np.sqrt(var_R)
    P = rng.standard_normal(shape) * np.sqrt(var_P)
    return BathPhasePoint(R, P)


def wigner_sampler(bath: DiscretizedBath, beta):
    """``sample_wigner_thermal`` with the widths computed once.

    Draws the same numbers in the same order for a given generator.
    """
    var_R, var_P = thermal_wigner_variances(bath.omega, beta)
    sd_R, sd_P = np.sqrt(var_R), np.sqrt(var_P)
    n = bath.n_modes

    def draw(rng: np.random.Generator) -> BathPhasePoint:
        return BathPhasePoint(rng.standard_normal(n) * sd_R, rng.standard_normal(n) * sd_P)

    return draw
