"""Error-free float transformations used for angle accumulation.

``n * t`` for an integer ``n`` and a double ``t`` is evaluated as an unevaluated
sum ``p + e`` of two doubles (Dekker's algorithm), so the fractional part of the
product keeps full double accuracy for ``|n|`` far beyond 10**7.
"""

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

# Largest |n| for which float(n) is exact.
EXACT_INT_LIMIT = 2**53


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def two_prod(a, b):
    """Return ``(p, e)`` with ``p = fl(a*b)`` and ``p + e == a*b`` exactly."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p = a * b
    ahi, alo = split(a)
    bhi, blo = split(b)
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


def frac(x):
    x = np.asarray(x, dtype=np.float64)
    r = x - np.floor(x)
    # x slightly below an integer can round up to exactly 1.0
    return np.where(r >= 1.0, 0.0, r)


def frac_mul_add(base, n, t, t_lo=0.0):
    """Fractional part of ``base + n * (t + t_lo)``, vectorised over ``n``.

    ``t + t_lo`` is a double-double; ``n`` must be integers below 2**53.
    """
    n = np.asarray(n, dtype=np.float64)
    p, e = two_prod(n, t)
    p_frac = p - np.floor(p)  # exact for doubles
    tail = e + n * t_lo
    s, s_err = two_sum(p_frac, np.asarray(base, dtype=np.float64))
    return frac(s + (s_err + tail))


def circle_distance(a, b=0.0):
    """Distance between angles ``a`` and ``b`` measured in turns on ``R/Z``."""
    d = np.abs(np.asarray(a, dtype=np.float64) - b) % 1.0
    return np.minimum(d, 1.0 - d)
