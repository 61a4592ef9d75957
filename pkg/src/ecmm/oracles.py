"""Brute-force references: exact few-level propagation, Rabi formula,
direct traces and a quadrature Wigner transform of the thermal oscillator.

Nothing here draws random numbers.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "propagate_exact",
    "rabi_populations",
    "trace_product_direct",
    "wigner_width_oracle",
    "OracleConvergenceError",
]

MAX_EIGENSTATES = 200


class OracleConvergenceError(RuntimeError):
    pass


def _symmetric(V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or not np.allclose(V, V.T, rtol=0.0, atol=1e-12):
        raise ValueError("V must be a real symmetric matrix")
    return V


def propagate_exact(V, c0, t: float) -> np.ndarray:
    """Amplitudes ``exp(-i V t) c0`` by eigendecomposition of ``V``."""
    V = _symmetric(V)
    c0 = np.asarray(c0, dtype=complex)
    if c0.shape != (V.shape[0],):
        raise ValueError("c0 and V dimensions differ")
    lam, Q = np.linalg.eigh(V)
    return Q @ (np.exp(-1j * lam * t) * (Q.T @ c0))


def rabi_populations(epsilon: float, delta: float, t):
    """Two-level populations for H = eps sigma_z + delta sigma_x, start in state 1."""
    t = np.asarray(t, dtype=float)
    omega2 = epsilon**2 + delta**2
    if omega2 == 0.0:
        P2 = np.zeros_like(t)
    else:
        P2 = delta**2 / omega2 * np.sin(np.sqrt(omega2) * t) ** 2
    return 1.0 - P2, P2


def trace_product_direct(A, B) -> complex:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or A.shape != B.shape[::-1]:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    return complex(np.einsum("nm,mn->", A, B))


def _thermal_density(weights: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum_n w_n psi_n(a) psi_n(b) for oscillator eigenfunctions in scaled length units.

    The Hermite-function recurrence is run in place so only two levels are kept.
    """
    prev_a = np.zeros_like(a)
    prev_b = np.zeros_like(b)
    cur_a = np.pi**-0.25 * np.exp(-0.5 * a**2)
    cur_b = np.pi**-0.25 * np.exp(-0.5 * b**2)
    rho = weights[0] * cur_a * cur_b
    for n in range(1, weights.size):
        nxt_a = np.sqrt(2.0 / n) * a * cur_a - np.sqrt((n - 1) / n) * prev_a
        nxt_b = np.sqrt(2.0 / n) * b * cur_b - np.sqrt((n - 1) / n) * prev_b
        prev_a, cur_a = cur_a, nxt_a
        prev_b, cur_b = cur_b, nxt_b
        rho += weights[n] * cur_a * cur_b
    return rho


def wigner_width_oracle(omega: float, beta, tol: float = 1e-13):
    """Second moments of the Wigner function of exp(-beta H)/Z, H = (P^2 + w^2 R^2)/2.

    The thermal density matrix is assembled from Boltzmann-weighted eigenstates
    until the neglected weight is below ``tol``; its Wigner transform
    ``W(R, P) = (1/pi) int dy rho(R - y, R + y) exp(2 i P y)`` is evaluated by
    trapezoidal quadrature on grids, and ``<R^2>``, ``<P^2>`` are integrated
    numerically.  Returns ``(var_R, var_P)``.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    beta = float(beta)
    if not beta > 0:
        raise ValueError("beta must be positive")

    if math.isinf(beta):
        n_max = 0
        weights = np.ones(1)
    else:
        q = math.exp(-beta * omega)
        n_max = 0
        # tail of a geometric series q^N / (1 - q), relative to the total
        while q ** (n_max + 1) > tol:
            n_max += 1
            if n_max >= MAX_EIGENSTATES:
                raise OracleConvergenceError(
                    f"thermal sum needs more than {MAX_EIGENSTATES} states at beta*omega = {beta * omega}"
                )
        weights = q ** np.arange(n_max + 1)
        weights /= weights.sum()

    # lengths in units of the oscillator length 1/sqrt(omega)
    half = math.sqrt(2 * n_max + 1) + 9.0
    s = np.arange(-half, half + 1e-12, 0.2)         # centre coordinate
    k = np.arange(-half, half + 1e-12, 0.2)         # scaled momentum P/sqrt(omega)
    # cos(2 k u) must be resolved up to |k| = half
    du = np.pi / (8.0 * half)
    u = np.arange(-half, half + 1e-12, du)          # half separation
    ds = s[1] - s[0]
    dk = k[1] - k[0]

    rho = _thermal_density(weights, s[:, None] - u[None, :], s[:, None] + u[None, :])

    # W(s, k) in scaled variables; rho is even in u so the transform is a cosine
    cos = np.cos(2.0 * k[:, None] * u[None, :])
    W = (rho @ cos.T) * du / np.pi

    norm = np.sum(W) * ds * dk
    var_s = np.sum(W * s[:, None] ** 2) * ds * dk / norm
    var_k = np.sum(W * k[None, :] ** 2) * ds * dk / norm
    return var_s / omega, var_k * omega
