"""Monte Carlo estimators for populations and correlation functions.

A trajectory contributes ``A(z_0) * B~(z_t)``; the ensemble mean is scaled by
the total measure ``F`` of the constraint space only when the statistics are
finalised, so the per-sample weights are the bare phase-space functions.

Trajectory ``i`` always draws from ``rng_stream(seed, i)`` (electronic point
first, then the bath), batches have a fixed size independent of the thread
count, and batch accumulators are merged in a fixed binary tree.  The output
is therefore bit-identical for any number of worker threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bath import wigner_sampler
from .dynamics import IntegratorConfig, SpinBosonSystem, TrajectoryState, constraint_norm, propagate, total_energy
from .mapping import (
    ElectronicPhasePoint,
    MappingSpace,
    as_hermitian,
    check_on_constraint,
    op_to_adjoint_function,
    op_to_function,
)
from .sampling import rng_stream, sample_ehrenfest_initial, sample_uniform_constraint

__all__ = [
    "TimeSeriesAccumulator",
    "PopulationResult",
    "CorrelationResult",
    "ConservationStats",
    "TooManyAbortsError",
    "initial_weight",
    "final_weight",
    "run_ensemble",
    "estimate_population",
    "estimate_correlation",
    "ehrenfest_population",
    "DEFAULT_BATCH_SIZE",
    "MAX_ABORT_FRACTION",
]

logger = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 1000
MAX_ABORT_FRACTION = 1.0e-3


class TooManyAbortsError(RuntimeError):
    def __init__(self, n_aborted: int, n_traj: int):
        self.n_aborted = n_aborted
        self.n_traj = n_traj
        super().__init__(
            f"{n_aborted} of {n_traj} trajectories produced non-finite values "
            f"(limit {MAX_ABORT_FRACTION:.1%}); reduce dt"
        )


def _state_index(space: MappingSpace, n: int):
    if not 0 <= n < space.num_states:
        raise IndexError(f"state {n} outside [0, {space.num_states})")


def initial_weight(space: MappingSpace, z: ElectronicPhasePoint, n: int):
    """Phase-space function of |n><n|: (x_n^2 + p_n^2)/2 - gamma."""
    _state_index(space, n)
    check_on_constraint(space, z)
    return 0.5 * (z.x[..., n] ** 2 + z.p[..., n] ** 2) - space.gamma


def final_weight(space: MappingSpace, z: ElectronicPhasePoint, m: int):
    """Adjoint function of |m><m|: z1 (x_m^2 + p_m^2)/2 - z2."""
    _state_index(space, m)
    check_on_constraint(space, z)
    return 0.5 * space.z1 * (z.x[..., m] ** 2 + z.p[..., m] ** 2) - space.z2


@dataclass
class TimeSeriesAccumulator:
    """Running sums of per-trajectory observables on a fixed time grid."""

    times: np.ndarray
    n_obs: int
    total: np.ndarray = None
    total_sq: np.ndarray = None
    count: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        shape = (self.times.size, self.n_obs)
        if self.total is None:
            self.total = np.zeros(shape)
        if self.total_sq is None:
            self.total_sq = np.zeros(shape)

    def add(self, values: np.ndarray):
        """``values`` has shape (n_traj, n_times, n_obs)."""
        values = np.asarray(values, dtype=float)
        if values.shape[1:] != self.total.shape:
            raise ValueError(f"expected (*, {self.total.shape[0]}, {self.n_obs}), got {values.shape}")
        self.total = self.total + values.sum(axis=0)
        self.total_sq = self.total_sq + (values**2).sum(axis=0)
        self.count += values.shape[0]
        return self

    def merge(self, other: "TimeSeriesAccumulator") -> "TimeSeriesAccumulator":
        if not np.array_equal(self.times, other.times) or self.n_obs != other.n_obs:
            raise ValueError("accumulators are on different grids")
        return TimeSeriesAccumulator(
            self.times, self.n_obs, self.total + other.total, self.total_sq + other.total_sq,
            self.count + other.count,
        )

    @staticmethod
    def merge_tree(accs) -> "TimeSeriesAccumulator":
        """Pairwise merge in a fixed binary tree over the list order."""
        accs = list(accs)
        if not accs:
            raise ValueError("nothing to merge")
        while len(accs) > 1:
            nxt = [accs[i].merge(accs[i + 1]) for i in range(0, len(accs) - 1, 2)]
            if len(accs) % 2:
                nxt.append(accs[-1])
            accs = nxt
        return accs[0]

    def mean(self, scale: float = 1.0) -> np.ndarray:
        if self.count == 0:
            raise ValueError("no samples accumulated")
        return scale * self.total / self.count

    def stderr(self, scale: float = 1.0) -> np.ndarray:
        n = self.count
        if n < 2:
            return np.full_like(self.total, np.nan)
        var = (self.total_sq - self.total**2 / n) / (n - 1)
        return scale * np.sqrt(np.maximum(var, 0.0) / n)


@dataclass
class ConservationStats:
    """Per-trajectory worst relative deviations over the recorded grid."""

    energy_drift: np.ndarray
    norm_drift: np.ndarray

    @property
    def max_energy_drift(self) -> float:
        return float(np.max(self.energy_drift)) if self.energy_drift.size else 0.0

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(self.norm_drift)) if self.norm_drift.size else 0.0


@dataclass
class PopulationResult:
    times: np.ndarray
    populations: np.ndarray   # (n_times, F): P_{m <- n}(t)
    stderr: np.ndarray
    D: np.ndarray
    se_D: np.ndarray
    initial_state: int
    n_traj: int
    n_aborted: int = 0
    method: str = "ecmm"
    gamma: float | None = None
    conservation: ConservationStats | None = field(default=None, repr=False)
    se_population_sum: np.ndarray | None = field(default=None, repr=False)

    @property
    def population_sum(self) -> np.ndarray:
        return self.populations.sum(axis=1)


@dataclass
class CorrelationResult:
    times: np.ndarray
    values: np.ndarray        # complex C_AB(t)
    stderr_real: np.ndarray
    stderr_imag: np.ndarray
    n_traj: int
    n_aborted: int = 0


def _batches(n_traj: int, batch_size: int):
    return [(lo, min(lo + batch_size, n_traj)) for lo in range(0, n_traj, batch_size)]


def run_ensemble(
    system: SpinBosonSystem,
    config: IntegratorConfig,
    *,
    gamma: float,
    beta,
    sample_electronic: Callable,
    observe: Callable,
    n_obs: int,
    n_traj: int,
    seed: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    threads: int = 1,
    monitor: bool = False,
    freeze_nuclei: bool = False,
):
    """Propagate ``n_traj`` trajectories and accumulate ``observe(z0, z_t)``.

    ``sample_electronic(rng)`` returns one electronic phase point;
    ``observe`` maps batched (z0, z_t) to an (n, n_obs) array.  Returns the
    merged accumulator, the abort count and optional conservation stats.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    config.check(system)
    times = config.times
    stride = config.record_stride
    draw_bath = wigner_sampler(system.bath, beta)

    def run_batch(bounds):
        lo, hi = bounds
        zs, Rs, Ps = [], [], []
        for i in range(lo, hi):
            rng = rng_stream(seed, i)
            z = sample_electronic(rng)
            b = draw_bath(rng)
            zs.append(z)
            Rs.append(b.R)
            Ps.append(b.P)
        z0 = ElectronicPhasePoint(np.stack([z.x for z in zs]), np.stack([z.p for z in zs]))
        state = TrajectoryState(np.stack(Rs), np.stack(Ps), z0)
        values = np.empty((hi - lo, times.size, n_obs))
        values[:, 0] = observe(z0, z0)
        ok = state.is_finite()
        if monitor:
            E0 = total_energy(system, state, gamma)
            N0 = constraint_norm(state)
            e_drift = np.zeros(hi - lo)
            n_drift = np.zeros(hi - lo)
        for r in range(1, times.size):
            state = propagate(system, state, gamma, config.dt, stride, freeze_nuclei=freeze_nuclei,
                              check_finite=False, compiled=not freeze_nuclei)
            ok &= state.is_finite()
            z = state.z
            if not ok.all():
                # keep the estimator functions away from NaN rows
                z = ElectronicPhasePoint(np.where(ok[:, None], z.x, z0.x), np.where(ok[:, None], z.p, z0.p))
            values[:, r] = observe(z0, z)
            if monitor:
                e_drift = np.maximum(e_drift, np.abs(total_energy(system, state, gamma) - E0) / np.abs(E0))
                n_drift = np.maximum(n_drift, np.abs(constraint_norm(state) - N0) / N0)
        acc = TimeSeriesAccumulator(times, n_obs).add(values[ok])
        stats = (e_drift[ok], n_drift[ok]) if monitor else None
        return acc, int((~ok).sum()), stats

    bounds = _batches(n_traj, batch_size)
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_batch, bounds))
    else:
        results = [run_batch(b) for b in bounds]

    acc = TimeSeriesAccumulator.merge_tree(r[0] for r in results)
    n_aborted = sum(r[1] for r in results)
    if n_aborted:
        logger.warning("%d of %d trajectories aborted on non-finite values", n_aborted, n_traj)
    if n_aborted > MAX_ABORT_FRACTION * n_traj:
        raise TooManyAbortsError(n_aborted, n_traj)
    stats = None
    if monitor:
        stats = ConservationStats(
            np.concatenate([r[2][0] for r in results]), np.concatenate([r[2][1] for r in results])
        )
    return acc, n_aborted, stats


def _population_result(acc, scale, F, initial_state, n_traj, n_aborted, method, gamma, stats):
    mean = acc.mean(scale)
    se = acc.stderr(scale)
    return PopulationResult(
        times=acc.times,
        populations=mean[:, :F],
        stderr=se[:, :F],
        D=mean[:, F],
        se_D=se[:, F],
        se_population_sum=se[:, F + 1],
        initial_state=initial_state,
        n_traj=n_traj,
        n_aborted=n_aborted,
        method=method,
        gamma=gamma,
        conservation=stats,
    )


def estimate_population(
    system: SpinBosonSystem,
    space: MappingSpace,
    config: IntegratorConfig,
    n_traj: int,
    seed: int,
    *,
    beta,
    initial_state: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    threads: int = 1,
    monitor: bool = False,
    freeze_nuclei: bool = False,
) -> PopulationResult:
    """eCMM populations P_{m <- n}(t) and D(t) = P_{0 <- n} - P_{1 <- n}.

    Electronic initial points are uniform on the constraint space of
    ``space``; the same gamma is used for the sampling sphere, the
    equations of motion and both estimator weights.
    """
    if space.num_states != system.num_states:
        raise ValueError("mapping space and system disagree on the number of states")
    _state_index(space, initial_state)
    F = space.num_states

    def observe(z0, zt):
        w0 = initial_weight(space, z0, initial_state)
        wt = np.stack([final_weight(space, zt, m) for m in range(F)], axis=-1)
        pops = w0[:, None] * wt
        return np.concatenate([pops, (pops[:, 0] - pops[:, 1])[:, None], pops.sum(axis=1)[:, None]], axis=1)

    acc, n_aborted, stats = run_ensemble(
        system, config, gamma=space.gamma, beta=beta,
        sample_electronic=lambda rng: sample_uniform_constraint(space, rng),
        observe=observe, n_obs=F + 2, n_traj=n_traj, seed=seed, batch_size=batch_size,
        threads=threads, monitor=monitor, freeze_nuclei=freeze_nuclei,
    )
    return _population_result(acc, F, F, initial_state, n_traj, n_aborted, "ecmm", space.gamma, stats)


def ehrenfest_population(
    system: SpinBosonSystem,
    config: IntegratorConfig,
    n_traj: int,
    seed: int,
    *,
    beta,
    initial_state: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    threads: int = 1,
    monitor: bool = False,
) -> PopulationResult:
    """Mean-field populations (x_m^2 + p_m^2)/2 from a focused initial state."""
    F = system.num_states

    def observe(z0, zt):
        pops = zt.actions
        return np.concatenate([pops, (pops[:, 0] - pops[:, 1])[:, None], pops.sum(axis=1)[:, None]], axis=1)

    acc, n_aborted, stats = run_ensemble(
        system, config, gamma=0.0, beta=beta,
        sample_electronic=lambda rng: sample_ehrenfest_initial(F, initial_state, rng),
        observe=observe, n_obs=F + 2, n_traj=n_traj, seed=seed, batch_size=batch_size,
        threads=threads, monitor=monitor,
    )
    return _population_result(acc, 1.0, F, initial_state, n_traj, n_aborted, "ehrenfest", None, stats)


def estimate_correlation(
    system: SpinBosonSystem,
    space: MappingSpace,
    config: IntegratorConfig,
    A,
    B,
    n_traj: int,
    seed: int,
    *,
    beta,
    batch_size: int = DEFAULT_BATCH_SIZE,
    threads: int = 1,
    freeze_nuclei: bool = False,
) -> CorrelationResult:
    """C_AB(t) = F * E[A(z_0) B~(z_t)] for electronic operators A and B."""
    A = as_hermitian(A, space.num_states)
    B = as_hermitian(B, space.num_states)

    def observe(z0, zt):
        v = op_to_function(space, A, z0) * op_to_adjoint_function(space, B, zt)
        return np.stack([v.real, v.imag], axis=-1)

    acc, n_aborted, _ = run_ensemble(
        system, config, gamma=space.gamma, beta=beta,
        sample_electronic=lambda rng: sample_uniform_constraint(space, rng),
        observe=observe, n_obs=2, n_traj=n_traj, seed=seed, batch_size=batch_size,
        threads=threads, freeze_nuclei=freeze_nuclei,
    )
    F = space.num_states
    mean = acc.mean(F)
    se = acc.stderr(F)
    return CorrelationResult(acc.times, mean[:, 0] + 1j * mean[:, 1], se[:, 0], se[:, 1], n_traj, n_aborted)
