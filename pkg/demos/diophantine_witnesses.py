"""
Continued fractions and witness indices
=======================================

Two points of the disk whose log-odds differ by ``theta`` come close along
the orbit when ``n * theta`` is close to an integer and separate when it is
close to a half integer.  The continued fraction of ``theta`` gives the first
kind of index; an exact search gives the second.
"""

from liyorke import diophantine as dio

theta = dio.RealWithError.named("sqrt2")
cf = dio.continued_fraction(theta, 10)
print("partial quotients:", cf.terms())

for c in dio.convergents(cf)[:8]:
    print(f"  p/q = {c.p}/{c.q}   q*theta - p = {float(c.signed_err):+.3e}")

# Convergent denominators are exactly the record approaches to 0.
zero = dio.near_zero_subsequence(theta, max_index=10**5)
print("near 0  :", zero.indices)

# Record approaches to 1/2 come from the exact first-hit search.
half = dio.near_half_subsequence(theta, 10, 10**6)
print("near 1/2:", half.indices)
print("distances:", [f"{d:.2e}" for d in half.distances])

# Multiples of sqrt2 keep an exact continued fraction.
print("3*sqrt2 :", dio.continued_fraction(theta.scaled(3), 12).terms())

# A decimal with a wide error bar certifies only a few quotients.
approx = dio.RealWithError.parse("1.41421", abs_error=5e-6)
short = dio.continued_fraction(approx, 20)
print("1.41421 +- 5e-6 certifies", short.certified_depth, "quotients:", short.terms())
