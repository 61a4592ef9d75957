"""Constraint phase space for F electronic states and the mapping kernel pair.

Electronic phase points are stored as Cartesian arrays ``x`` and ``p`` of
shape ``(..., F)``; every function here broadcasts over leading batch axes so
the same code serves single points and whole trajectory ensembles.  The
complex amplitude ``c = (x + i p) / sqrt(2)`` is used internally because the
kernel is a rank-one projector in that variable: ``K = c c^dagger - gamma I``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "ConstraintViolation",
    "MappingSpace",
    "ElectronicPhasePoint",
    "MCEstimate",
    "as_hermitian",
    "check_on_constraint",
    "kernel",
    "inverse_kernel",
    "op_to_function",
    "op_to_adjoint_function",
    "sphere_moment2",
    "sphere_moment4",
    "trace_product_mc",
]

# relative tolerance on the constraint radius for points that claim to be on it
CONSTRAINT_RTOL = 1.0e-10
HERMITIAN_ATOL = 1.0e-12


class ConstraintViolation(ValueError):
    """A phase point does not lie on the constraint hypersphere."""

    def __init__(self, measured: float, expected: float):
        self.measured = float(measured)
        self.expected = float(expected)
        super().__init__(
            f"phase point off constraint: sum(x^2+p^2) = {self.measured!r}, "
            f"expected {self.expected!r}"
        )


@dataclass(frozen=True)
class MappingSpace:
    """Number of electronic states ``F`` and the zero-point-energy parameter.

    The constraint sum_n (x_n^2 + p_n^2)/2 = 1 + F*gamma has a real radius
    only for gamma > -1/F, which is enforced on construction.
    """

    num_states: int
    gamma: float

    def __post_init__(self):
        if int(self.num_states) != self.num_states or self.num_states < 1:
            raise ValueError(f"num_states must be a positive integer, got {self.num_states!r}")
        object.__setattr__(self, "num_states", int(self.num_states))
        object.__setattr__(self, "gamma", float(self.gamma))
        if not np.isfinite(self.gamma) or 1.0 + self.num_states * self.gamma <= 0.0:
            raise ValueError(
                f"gamma must satisfy gamma > -1/F = {-1.0 / self.num_states!r}, got {self.gamma!r}"
            )

    @property
    def action(self) -> float:
        """Total electronic action ``1 + F*gamma`` on the constraint."""
        return 1.0 + self.num_states * self.gamma

    @property
    def radius2(self) -> float:
        return 2.0 * self.action

    @property
    def z1(self) -> float:
        """Coefficient of the projector part of the inverse kernel."""
        return (1.0 + self.num_states) / self.action**2

    @property
    def z2(self) -> float:
        """Coefficient of the identity part of the inverse kernel."""
        return (1.0 - self.gamma) / self.action


@dataclass(frozen=True)
class ElectronicPhasePoint:
    """Mapping coordinates and momenta, arrays of shape ``(..., F)``."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if x.shape != p.shape or x.ndim == 0:
            raise ValueError(f"x and p must share a non-scalar shape, got {x.shape} and {p.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_amplitudes(cls, c) -> "ElectronicPhasePoint":
        c = np.asarray(c, dtype=complex) * np.sqrt(2.0)
        return cls(c.real.copy(), c.imag.copy())

    @property
    def num_states(self) -> int:
        return self.x.shape[-1]

    @property
    def amplitudes(self) -> np.ndarray:
        return (self.x + 1j * self.p) / np.sqrt(2.0)

    @property
    def actions(self) -> np.ndarray:
        """Per-state actions (x_n^2 + p_n^2)/2."""
        return 0.5 * (self.x**2 + self.p**2)

    def norm2(self) -> np.ndarray:
        return np.sum(self.x**2 + self.p**2, axis=-1)

    def __len__(self):
        if self.x.ndim == 1:
            raise TypeError("single phase point has no length")
        return self.x.shape[0]

    def __getitem__(self, idx) -> "ElectronicPhasePoint":
        if self.x.ndim == 1:
            raise TypeError("single phase point is not indexable")
        return ElectronicPhasePoint(self.x[idx], self.p[idx])


class MCEstimate(NamedTuple):
    value: complex
    stderr: float


def as_hermitian(A, num_states: int | None = None) -> np.ndarray:
    """Validate and return ``A`` as a complex Hermitian matrix."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"operator must be a square matrix, got shape {A.shape}")
    if num_states is not None and A.shape[0] != num_states:
        raise ValueError(f"operator dimension {A.shape[0]} does not match F = {num_states}")
    if not np.allclose(A, A.conj().T, rtol=0.0, atol=HERMITIAN_ATOL):
        raise ValueError("operator is not Hermitian")
    return A


def check_on_constraint(space: MappingSpace, z: ElectronicPhasePoint, rtol: float = CONSTRAINT_RTOL):
    if z.num_states != space.num_states:
        raise ValueError(f"phase point has {z.num_states} states, space has F = {space.num_states}")
    norm2 = z.norm2()
    err = np.abs(norm2 - space.radius2)
    if np.any(err > rtol * space.radius2):
        worst = np.unravel_index(np.argmax(err), np.shape(err)) if np.ndim(err) else ()
        raise ConstraintViolation(np.asarray(norm2)[worst], space.radius2)


def _projector_part(z: ElectronicPhasePoint) -> np.ndarray:
    # (x_n + i p_n)(x_m - i p_m)/2 == c_n conj(c_m)
    c = z.amplitudes
    return c[..., :, None] * c[..., None, :].conj()


def kernel(space: MappingSpace, z: ElectronicPhasePoint) -> np.ndarray:
    """Mapping kernel ``K[n, m] = (x_n + i p_n)(x_m - i p_m)/2 - gamma delta_nm``.

    Raises ConstraintViolation if ``z`` is not on the constraint space.
    """
    check_on_constraint(space, z)
    return _projector_part(z) - space.gamma * np.eye(space.num_states)


def inverse_kernel(space: MappingSpace, z: ElectronicPhasePoint) -> np.ndarray:
    """Inverse kernel ``z1 (x_n + i p_n)(x_m - i p_m)/2 - z2 delta_nm``."""
    check_on_constraint(space, z)
    return space.z1 * _projector_part(z) - space.z2 * np.eye(space.num_states)


def _quadratic_form(A: np.ndarray, z: ElectronicPhasePoint) -> np.ndarray:
    c = z.amplitudes
    return np.einsum("...n,nm,...m->...", c.conj(), A, c)


def op_to_function(space: MappingSpace, A, z: ElectronicPhasePoint):
    """Phase-space function ``Tr[A K(z)]`` of an electronic operator."""
    A = as_hermitian(A, space.num_states)
    check_on_constraint(space, z)
    return _quadratic_form(A, z) - space.gamma * np.trace(A)


def op_to_adjoint_function(space: MappingSpace, B, z: ElectronicPhasePoint):
    """Adjoint phase-space function ``Tr[K^-1(z) B]``."""
    B = as_hermitian(B, space.num_states)
    check_on_constraint(space, z)
    return space.z1 * _quadratic_form(B, z) - space.z2 * np.trace(B)


def _check_index(space: MappingSpace, *idx: int):
    n = 2 * space.num_states
    for i in idx:
        if not 0 <= i < n:
            raise IndexError(f"index {i} outside [0, {n}) for X = (x, p)")


def sphere_moment2(space: MappingSpace, i: int, j: int) -> float:
    """Normalised constraint-space average of ``X_i X_j`` with ``X = (x, p)``.

    Indices are zero-based over the concatenated 2F-vector.
    """
    _check_index(space, i, j)
    return space.action / space.num_states * float(i == j)


def sphere_moment4(space: MappingSpace, i: int, j: int, k: int, l: int) -> float:
    """Normalised constraint-space average of ``X_i X_j X_k X_l``."""
    _check_index(space, i, j, k, l)
    F = space.num_states
    pairings = (i == j) * (k == l) + (i == k) * (j == l) + (i == l) * (j == k)
    return space.action**2 / (F * (F + 1)) * float(pairings)


def trace_product_mc(space: MappingSpace, A, B, n_samples: int, rng) -> MCEstimate:
    """Monte Carlo estimate of ``Tr[A B]`` as ``F * E[A(z) B~(z)]``.

    ``z`` is drawn uniformly on the constraint space; the factor F is the
    total invariant measure of that space.
    """
    from .sampling import sample_uniform_constraint

    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    A = as_hermitian(A, space.num_states)
    B = as_hermitian(B, space.num_states)
    z = sample_uniform_constraint(space, rng, size=n_samples)
    vals = op_to_function(space, A, z) * op_to_adjoint_function(space, B, z)
    F = space.num_states
    mean = F * vals.mean()
    var = vals.real.var(ddof=1) + vals.imag.var(ddof=1)
    return MCEstimate(complex(mean), float(F * np.sqrt(var / n_samples)))
