"""Phase-space kernels on the constraint sphere.

Run with ``python3 demos/01_kernels_and_sampling.py``.
"""

# %%
import math

import numpy as np

from ecmm.mapping import MappingSpace, inverse_kernel, kernel, trace_product_mc
from ecmm.oracles import trace_product_direct
from ecmm.sampling import rng_stream, sample_uniform_constraint

# %% [markdown]
# A two-state mapping space.  gamma sets the sphere radius: sum (x^2+p^2)/2 = 1 + F gamma.

# %%
space = MappingSpace(2, (math.sqrt(3) - 1) / 2)
print("action 1+F*gamma =", space.action, " z1 =", space.z1, " z2 =", space.z2)

rng = rng_stream(seed=1, stream_id=0)
z = sample_uniform_constraint(space, rng, size=50_000)
print("actions of first point:", z.actions[0], "sum:", z.actions[0].sum())

# %% [markdown]
# Both kernels have unit trace pointwise, and F times their average is the identity.

# %%
K, Kinv = kernel(space, z), inverse_kernel(space, z)
print("max |Tr K - 1|    ", np.abs(np.trace(K, axis1=1, axis2=2) - 1).max())
print("max |Tr Kinv - 1| ", np.abs(np.trace(Kinv, axis1=1, axis2=2) - 1).max())
print("F E[K]:\n", np.round(2 * K.mean(axis=0), 3))
print("F E[Kinv]:\n", np.round(2 * Kinv.mean(axis=0), 3))

# %% [markdown]
# Tr[A B] as a phase-space average, compared with the direct trace.

# %%
A = np.array([[0.3, 0.5 - 0.2j], [0.5 + 0.2j, -1.0]])
B = np.array([[1.0, 0.1j], [-0.1j, 0.4]])
est = trace_product_mc(space, A, B, 100_000, rng)
print(f"MC {est.value.real:.4f} +- {est.stderr:.4f}   direct {trace_product_direct(A, B).real:.4f}")
