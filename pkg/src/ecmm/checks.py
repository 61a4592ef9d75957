"""Invariant suite behind ``ecmm check``.

Each check returns ``(passed, detail)``; :func:`run_checks` collects them.
"""

from __future__ import annotations

import math
import time
from typing import NamedTuple

import numpy as np

from . import mapping
from .bath import (
    Debye,
    DiscretizedBath,
    Ohmic,
    discretize,
    reorg_energy_continuous,
    reorg_energy_discrete,
    thermal_wigner_variances,
)
from .dynamics import IntegratorConfig, SpinBosonSystem, TrajectoryState, potential_matrix, propagate
from .estimators import estimate_population
from .mapping import MappingSpace, inverse_kernel, kernel
from .oracles import propagate_exact, rabi_populations, wigner_width_oracle
from .sampling import index_tuples, rng_stream, sample_uniform_constraint, sphere_moment_oracle

GAMMAS = (-0.2, 0.0, (math.sqrt(3.0) - 1.0) / 2.0, 0.5, 1.0)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float


def check_kernel_traces(n_points=1000, seed=11):
    worst = 0.0
    for F in (2, 3):
        for i, g in enumerate(GAMMAS):
            space = MappingSpace(F, g)
            z = sample_uniform_constraint(space, rng_stream(seed, 10 * F + i), size=n_points)
            tk = np.trace(kernel(space, z), axis1=-2, axis2=-1)
            ti = np.trace(inverse_kernel(space, z), axis1=-2, axis2=-1)
            worst = max(worst, np.max(np.abs(tk - 1)), np.max(np.abs(ti - 1)))
    return worst < 1e-12, f"max |Tr - 1| = {worst:.2e}"


def check_moments():
    worst = 0.0
    for F in (2, 3, 4):
        for g in GAMMAS:
            space = MappingSpace(F, g)
            L = 2 * F
            for i, j in index_tuples(L, 2):
                worst = max(worst, abs(mapping.sphere_moment2(space, i, j)
                                       - sphere_moment_oracle((i, j), L, space.action)))
            for idx in index_tuples(L, 4):
                worst = max(worst, abs(mapping.sphere_moment4(space, *idx)
                                       - sphere_moment_oracle(idx, L, space.action)))
    return worst < 1e-12, f"max deviation = {worst:.2e}"


def check_reorganization():
    worst = 0.0
    for sd in (Ohmic(0.1, 1.0), Debye(0.25, 5.0)):
        for n in (1, 3, 50, 300):
            ratio = reorg_energy_discrete(discretize(sd, n)) / reorg_energy_continuous(sd)
            worst = max(worst, abs(ratio - n / (n + 1)))
    return worst < 1e-12, f"max |ratio - N/(N+1)| = {worst:.2e}"


def check_wigner_width():
    var_R, var_P = wigner_width_oracle(2.0, math.inf)
    ref_R, ref_P = thermal_wigner_variances(2.0, math.inf)
    err = max(abs(var_R - ref_R), abs(var_P - ref_P))
    return err < 1e-6, f"ground-state width error = {err:.2e}"


def check_frozen_nuclei(seed=12):
    rng = rng_stream(seed, 0)
    bath = discretize(Ohmic(0.4, 2.5), 10)
    system = SpinBosonSystem(1.0, 1.0, bath)
    R = rng.standard_normal(bath.n_modes)
    space = MappingSpace(2, 0.0)
    z = sample_uniform_constraint(space, rng)
    state = TrajectoryState(R, np.zeros_like(R), z)
    V = potential_matrix(system, R)
    t_end = 50.0 / system.tunneling_frequency
    worst = 0.0
    for k in range(1, 11):
        t = t_end * k / 10
        out = propagate(system, state, space.gamma, t / 1000, 1000, freeze_nuclei=True)
        ref = propagate_exact(V, z.amplitudes, t)
        worst = max(worst, np.max(np.abs(np.abs(out.z.amplitudes) ** 2 - np.abs(ref) ** 2)))
    return worst < 1e-8, f"max population error = {worst:.2e}"


def check_rabi(n_traj, seed=13):
    system = SpinBosonSystem(1.0, 1.0, DiscretizedBath(np.ones(1), np.zeros(1)))
    config = IntegratorConfig(0.01, 5.0, 25)
    worst = 0.0
    for g in GAMMAS:
        res = estimate_population(system, MappingSpace(2, g), config, n_traj, seed, beta=math.inf)
        _, P2 = rabi_populations(1.0, 1.0, res.times)
        z = np.abs(res.populations[:, 1] - P2) / res.stderr[:, 1]
        worst = max(worst, float(np.max(z[1:])))
    return worst < 3.0, f"max |P2 - Rabi|/se = {worst:.2f} at {n_traj} trajectories"


def run_checks(quick: bool = False):
    checks = [
        ("kernel traces", check_kernel_traces),
        ("moment oracle agreement", check_moments),
        ("reorganization identity", check_reorganization),
        ("Wigner width oracle", check_wigner_width),
        ("frozen-nuclei equivalence", check_frozen_nuclei),
        ("bath-free Rabi convergence", lambda: check_rabi(10_000 if quick else 100_000)),
    ]
    results = []
    for name, fn in checks:
        t0 = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  time    detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.seconds:6.2f}s {r.detail}")
    return "\n".join(lines)
