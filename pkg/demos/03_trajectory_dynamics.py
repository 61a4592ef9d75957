"""Single trajectories of the mapping Hamiltonian."""

# %%
import numpy as np

from ecmm.bath import Ohmic, discretize, sample_wigner_thermal
from ecmm.dynamics import (
    SpinBosonSystem,
    TrajectoryState,
    constraint_norm,
    default_dt,
    potential_matrix,
    propagate,
    total_energy,
)
from ecmm.mapping import MappingSpace
from ecmm.oracles import propagate_exact
from ecmm.sampling import sample_uniform_constraint

rng = np.random.default_rng(5)
system = SpinBosonSystem(epsilon=1.0, delta=1.0, bath=discretize(Ohmic(0.4, 2.5), 100))
space = MappingSpace(2, 0.5)
dt = default_dt(system)
print("default dt:", dt)

# %% [markdown]
# With the nuclei pinned, the electronic variables follow the Schrodinger equation exactly.

# %%
bath = sample_wigner_thermal(system.bath, 0.25, rng)
z = sample_uniform_constraint(space, rng)
state = TrajectoryState(bath.R, np.zeros_like(bath.P), z)
out = propagate(system, state, space.gamma, 0.01, 2000, freeze_nuclei=True)
ref = propagate_exact(potential_matrix(system, bath.R), z.amplitudes, 20.0)
print("|c|^2 mapping:", np.abs(out.z.amplitudes) ** 2)
print("|c|^2 exact:  ", np.abs(ref) ** 2)

# %% [markdown]
# Coupled run: energy and the constraint norm stay fixed.

# %%
state = TrajectoryState(bath.R, bath.P, z)
E0, N0 = total_energy(system, state, space.gamma), constraint_norm(state)
for chunk in range(5):
    state = propagate(system, state, space.gamma, dt, 300)
    E, N = total_energy(system, state, space.gamma), constraint_norm(state)
    print(f"t={(chunk + 1) * 300 * dt:6.2f}  dE/E={abs(E - E0) / abs(E0):.1e}  dN/N={abs(N - N0) / N0:.1e}")
