"""Discrete harmonic baths and their thermal Wigner sampling."""

# %%
import numpy as np

from ecmm.bath import Debye, Ohmic, discretize, reorg_energy_continuous, reorg_energy_discrete, sample_wigner_thermal

# %%
for sd in (Ohmic(alpha=0.1, omega_c=1.0), Debye(reorg_lambda=0.25, omega_c=5.0)):
    b = discretize(sd, 3)
    print(type(sd).__name__, "omega_j =", np.round(b.omega, 6), "c_j/omega_j =", np.round(b.c / b.omega, 6))

# %% [markdown]
# With N modes the discrete reorganization energy is N/(N+1) of the continuum value.

# %%
sd = Ohmic(alpha=0.4, omega_c=2.5)
for n in (1, 10, 100, 1000):
    r = reorg_energy_discrete(discretize(sd, n)) / reorg_energy_continuous(sd)
    print(f"N={n:5d}  ratio={r:.12f}  N/(N+1)={n / (n + 1):.12f}")

# %% [markdown]
# Thermal Wigner samples: mean energy per mode is (omega/2) coth(beta omega/2).

# %%
b = discretize(sd, 5)
beta = 0.25
pts = sample_wigner_thermal(b, beta, np.random.default_rng(0), size=200_000)
E = 0.5 * (pts.P**2 + (b.omega * pts.R) ** 2)
print("sampled:", np.round(E.mean(axis=0), 3))
print("exact:  ", np.round(0.5 * b.omega / np.tanh(beta * b.omega / 2), 3))
