"""
Bidiagonal blocks and their powers
==================================

Each block has ``1 - eps_i`` on the diagonal and ``2 eps_i`` above it.  Its
spectral radius is below one, yet powers grow for a long time before they
decay.  The inverse is upper triangular with eigenvalues above one, so every
nonzero vector is driven to infinity backwards in time.
"""

import numpy as np

from liyorke import operator as op

schedule = op.build_schedule(0.1, [2, 4, 8, 16])
for p in schedule.blocks:
    print(f"block {p.i}: eps_i={p.eps_i:g}  L_i={p.L_i}  m_i={p.m_i}  n_i={p.n_i}")

b = schedule.block(1)
profile = op.transient_growth_profile(b, "uniform", 5000)
print(f"uniform probe on block 1 peaks at n={profile.argmax} with norm {np.exp(profile.log_max):.3e}")

# Forward powers eventually decay; the doubling search uses a rigorous bound.
for blk in schedule.block_matrices():
    print(f"block {blk.i}: ||T^n|| <= 1e-8 from n = {op.forward_decay_horizon(blk)}")

# Backwards every vector blows up; the scale is carried as a logarithm.
rng = np.random.default_rng(0)
x = op.TruncatedVector.random(schedule, rng)
for n in (0, 500, 1000, 2000, 4000):
    print(f"log ||T^-{n} x|| = {op.truncated_apply(schedule, 4, x, -n).log_norm():.3f}")
