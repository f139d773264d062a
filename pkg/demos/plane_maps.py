"""
Disk and plane maps
===================

The disk map ``f`` pushes every point outwards and turns it by an angle that
depends on its radius.  The map ``h`` carries the disk onto the punctured
plane and turns ``f`` into ``g``.  Both maps have closed-form iterates.
"""

import numpy as np

from liyorke import plane
from liyorke.plane import PlanePoint, Space

# A point at radius 1/2 has log-odds 0, so f only moves it radially.
z = PlanePoint.from_polar(0.5, 0.0, Space.DISK)
for n in range(4):
    w = plane.f_power(z, n)
    print(f"f^{n}(z): modulus {w.modulus:.10f}  angle {w.angle_turns:.6f}")

# Away from radius 1/2 the angle advances by n * ln(r / (1 - r)) turns.
z = PlanePoint.from_polar(0.8, 0.1, Space.DISK)
print("angle of f^3(z):", plane.f_power(z, 3).angle_turns)
print("plain doubles  :", (0.1 + 3 * np.log(0.8 / 0.2)) % 1.0)

# Large iterates stay exact in the log-odds coordinate even after the
# modulus rounds to 1.
far = plane.f_power(z, 10**6)
print("log-odds after 10^6 steps:", far.radial, " modulus:", far.modulus)

# h(f(z)) = g(h(z)) on a polar grid, computed with the literal complex formulas.
print("max conjugacy residual:", plane.conjugacy_residual(100, 100, 0.99))

# g multiplies the modulus by e at each step, g^{-1} divides by it.
w = PlanePoint.from_polar(1.0, 0.0, Space.PLANE)
print("|g^5(1)| =", plane.g_power(w, 5).modulus, " e^5 =", np.exp(5))
print("|g^-5(1)| =", plane.g_power(w, -5).modulus)
