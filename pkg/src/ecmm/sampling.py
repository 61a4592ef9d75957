"""Initial-condition sampling on the constraint space and moment oracles.

Random streams are keyed by ``(seed, stream_id)`` through numpy's
``SeedSequence`` spawn keys, so trajectory ``i`` sees the same numbers no
matter which worker runs it or in what order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mapping import ElectronicPhasePoint, MappingSpace

__all__ = [
    "RngStream",
    "rng_stream",
    "sample_uniform_constraint",
    "sample_ehrenfest_initial",
    "pair_partitions",
    "gaussian_moment_oracle",
    "sphere_moment_oracle",
    "sphere_surface",
]

MAX_ORACLE_ORDER = 8


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < 2**64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


def rng_stream(seed: int, stream_id: int) -> np.random.Generator:
    return RngStream(seed, stream_id).generator()


def sample_uniform_constraint(space: MappingSpace, rng: np.random.Generator, size: int | None = None):
    """Uniform point(s) on the sphere sum(x^2 + p^2) = 2(1 + F*gamma).

    2F standard normals are drawn and rescaled to the constraint radius.
    With ``size`` the result is a batch of shape ``(size, F)``.
    """
    F = space.num_states
    shape = (2 * F,) if size is None else (size, 2 * F)
    X = rng.standard_normal(shape)
    rows = X.reshape(-1, 2 * F)
    norm = np.sqrt(np.einsum("ij,ij->i", rows, rows))
    # an exactly zero draw has probability zero but cannot be normalised
    while not norm.all():
        bad = norm == 0.0
        rows[bad] = rng.standard_normal((int(bad.sum()), 2 * F))
        norm = np.sqrt(np.einsum("ij,ij->i", rows, rows))
    X = (rows * (np.sqrt(space.radius2) / norm)[:, None]).reshape(shape)
    return ElectronicPhasePoint(X[..., :F], X[..., F:])


def sample_ehrenfest_initial(num_states: int, occupied: int, rng: np.random.Generator, size: int | None = None):
    """Focused point: unit action on state ``occupied`` with a random phase."""
    if not 0 <= occupied < num_states:
        raise IndexError(f"occupied state {occupied} outside [0, {num_states})")
    theta = rng.uniform(0.0, 2.0 * np.pi, size=size)
    shape = (num_states,) if size is None else (size, num_states)
    x = np.zeros(shape)
    p = np.zeros(shape)
    x[..., occupied] = np.sqrt(2.0) * np.cos(theta)
    p[..., occupied] = np.sqrt(2.0) * np.sin(theta)
    return ElectronicPhasePoint(x, p)


@lru_cache(maxsize=None)
def pair_partitions(k: int) -> tuple:
    """All perfect matchings of ``range(k)`` as tuples of index pairs."""
    if k % 2:
        return ()
    if k == 0:
        return ((),)
    out = []
    for partner in range(1, k):
        rest = [i for i in range(1, k) if i != partner]
        for sub in pair_partitions(k - 2):
            out.append(((0, partner),) + tuple((rest[a], rest[b]) for a, b in sub))
    return tuple(out)


def gaussian_moment_oracle(indices, L: int) -> float:
    """Exact moment of a product of i.i.d. standard normals (Isserlis).

    ``indices`` names which of the ``L`` variables appear; repeats are allowed.
    """
    indices = tuple(indices)
    if L < 1:
        raise ValueError("L must be at least 1")
    if any(not 0 <= i < L for i in indices):
        raise IndexError(f"indices {indices} outside [0, {L})")
    k = len(indices)
    if k > MAX_ORACLE_ORDER:
        raise ValueError(f"moment order {k} exceeds the oracle cap {MAX_ORACLE_ORDER}")
    if k % 2:
        return 0.0
    total = 0
    for matching in pair_partitions(k):
        total += all(indices[a] == indices[b] for a, b in matching)
    return float(total)


def _log_gamma_ratio(L: int, k: int) -> float:
    return math.lgamma(L / 2) - math.lgamma((L + k) / 2)


def sphere_moment_oracle(indices, L: int, xi: float) -> float:
    """Moment of ``X_{n1}...X_{nk}`` averaged over the sphere sum(X^2)/2 = xi.

    Obtained from the Gaussian moment by removing the radial integral,
    which contributes ``2^(k/2) Gamma((L+k)/2) / Gamma(L/2)``.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    k = len(tuple(indices))
    g = gaussian_moment_oracle(indices, L)
    if g == 0.0:
        return 0.0
    return g * math.exp(_log_gamma_ratio(L, k)) / 2.0 ** (k / 2) * (2.0 * xi) ** (k / 2)


def sphere_surface(L: int, radius: float = 1.0) -> float:
    """Surface measure ``S_{L-1}(R) = 2 pi^(L/2) / Gamma(L/2) * R^(L-1)``."""
    return 2.0 * math.pi ** (L / 2) / math.gamma(L / 2) * radius ** (L - 1)


def index_tuples(L: int, k: int):
    """Every length-``k`` index tuple over ``L`` variables."""
    return itertools.product(range(L), repeat=k)
