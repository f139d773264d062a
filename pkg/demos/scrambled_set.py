"""
A finite scrambled set
======================

Radii whose log-odds sit on a lattice with step sqrt2 differ pairwise by
irrational amounts, so every pair is proximal and separated along the orbit
of ``f``.  The same pairs collapse under ``f^{-1}``.
"""

from liyorke import scrambled
from liyorke.dynamics import SystemHandle, liyorke_verdict

family = scrambled.certified_family(5)
print("radii:", [round(r, 6) for r in family.points])

for j, k in family.pairs():
    report = scrambled.pair_verdict(family, j, k, horizon=10_000)
    v = report.verdict
    print(f"({j},{k}) theta={report.theta.label:>9}  liminf~{v.liminf_estimate:.2e}"
          f"  limsup~{v.limsup_estimate:.4f}  {v.verdict.value}")

# Backwards in time every orbit falls into the origin.
f_inv = SystemHandle.disk_f().inverse()
x, y = family.disk_point(0), family.disk_point(4)
v = liyorke_verdict(f_inv, x, y, 200)
print("under f^-1:", v.verdict.value, "-", v.reason)

# A random family behaves the same way, without the exact certificate.
rand = scrambled.random_family(4, seed=1)
print("random family:", [scrambled.pair_verdict(rand, j, k).verdict.verdict.value
                         for j, k in rand.pairs()])
