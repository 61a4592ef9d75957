"""Ensemble populations for a spin-boson model, several gamma values."""

# %%
import math

import numpy as np

from ecmm.bath import DiscretizedBath, Ohmic, discretize
from ecmm.dynamics import IntegratorConfig, SpinBosonSystem, default_dt
from ecmm.estimators import ehrenfest_population, estimate_population
from ecmm.mapping import MappingSpace
from ecmm.oracles import rabi_populations

GAMMAS = (-0.2, 0.0, (math.sqrt(3) - 1) / 2, 0.5, 1.0)

# %% [markdown]
# Without coupling every gamma reproduces the Rabi oscillation.

# %%
free = SpinBosonSystem(1.0, 1.0, DiscretizedBath(np.ones(1), np.zeros(1)))
cfg = IntegratorConfig(dt=0.01, t_max=3.0, record_stride=50)
_, P2 = rabi_populations(1.0, 1.0, cfg.times)
print("t      exact  " + "  ".join(f"g={g:+.2f}" for g in GAMMAS))
runs = [estimate_population(free, MappingSpace(2, g), cfg, 20_000, seed=1, beta=math.inf) for g in GAMMAS]
for k, t in enumerate(cfg.times):
    print(f"{t:4.1f}  {P2[k]:.3f}  " + "  ".join(f"{r.populations[k, 1]:7.3f}" for r in runs))

# %% [markdown]
# Ohmic bath, alpha=0.1, omega_c=1, beta=0.25.  D(t) against the Ehrenfest baseline.

# %%
system = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.1, 1.0), 100))
dt = default_dt(system)
cfg = IntegratorConfig(dt=dt, t_max=10.0, record_stride=int(round(1.0 / dt)))
runs = {g: estimate_population(system, MappingSpace(2, g), cfg, 2000, seed=2, beta=0.25) for g in (0.0, 0.5)}
eh = ehrenfest_population(system, cfg, 2000, seed=2, beta=0.25)
print("t      D(g=0)        D(g=0.5)      Ehrenfest")
for k, t in enumerate(runs[0.0].times):
    a, b = runs[0.0], runs[0.5]
    print(f"{t:5.2f}  {a.D[k]:+.3f}+-{a.se_D[k]:.3f}  {b.D[k]:+.3f}+-{b.se_D[k]:.3f}  {eh.D[k]:+.3f}")
