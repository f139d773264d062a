"""
Empirical distribution functions of orbit distances
===================================================

The lower and upper distribution functions record how often the distance
between two orbits stays below a threshold ``t``, taken over prefixes in the
second half of the run.  They are diagnostics; nothing here is a limit.
"""

import numpy as np

from liyorke import dynamics, operator as op
from liyorke.plane import PlanePoint, Space

t_grid = [0.01, 0.1, 0.5, 1.0, 1.9]

# Two disk points whose log-odds differ by sqrt2.
f = dynamics.SystemHandle.disk_f()
x = PlanePoint(Space.DISK, 0.0, 0.0)
y = PlanePoint(Space.DISK, np.sqrt(2.0), 0.0)
series = dynamics.orbit_distance_series(f, x, y, 20_000)
est = dynamics.distribution_function(series, t_grid)
for t, lo, hi in zip(est.t_grid, est.lower_values, est.upper_values):
    print(f"disk pair   t={t:<5} lower={lo:.4f} upper={hi:.4f}")

# Two vectors of a truncation of the operator, forward in time.
schedule = op.build_schedule(0.1, [2, 4])
rng = np.random.default_rng(3)
u = op.TruncatedVector.random(schedule, rng, 1)
v = op.TruncatedVector.random(schedule, rng, 1)
T = dynamics.SystemHandle.operator(schedule, 1)
series = dynamics.orbit_distance_series(T, u, v, 8000, stride=20)
est = dynamics.distribution_function(series, [1.0, 10.0, 1e3, 1e6])
for t, lo, hi in zip(est.t_grid, est.lower_values, est.upper_values):
    print(f"operator    t={t:<9g} lower={lo:.4f} upper={hi:.4f}")
