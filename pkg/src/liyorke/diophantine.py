"""Continued fractions and the witness subsequences for irrational rotations.

Given an irrational angle ``theta`` (in turns), two increasing integer
sequences are built:

* ``m_k`` with ``m_k * theta`` close to an integer, so ``e^{2 pi i m_k theta} -> 1``;
  these are convergent denominators of ``theta``;
* ``n_k`` with ``n_k * theta`` close to ``1/2`` mod 1, so ``e^{2 pi i n_k theta} -> -1``;
  these are record-breakers of ``|frac(n theta) - 1/2|``.

Reals are carried as :class:`RealWithError`: an mpmath value, an absolute error
bound, and optionally an exact form (a quadratic surd, or Euler's number) from
which partial quotients are generated with integer arithmetic.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import mpmath
import numpy as np

from liyorke.errors import DomainError, NumericalRangeError, PrecisionExhausted

DEFAULT_DPS = 40
DEFAULT_SEARCH_BOUND = 10**5
MAX_DENOMINATOR = 2**63


def _dps(dps):
    return DEFAULT_DPS if dps is None else int(dps)


class QuadraticSurd:
    """The exact real ``(p + b*sqrt(d)) / q`` with integers ``p, b, d, q``.

    ``b == 0`` encodes a rational number.
    """

    __slots__ = ("p", "b", "d", "q")

    def __init__(self, p, b, d, q=1):
        p, b, d, q = int(p), int(b), int(d), int(q)
        if q == 0:
            raise ZeroDivisionError("denominator must be nonzero")
        if d < 0:
            raise DomainError("d must be non-negative")
        if b != 0 and d > 0:
            # pull square factors out of the radicand
            s = 2
            while s * s <= d:
                while d % (s * s) == 0:
                    d //= s * s
                    b *= s
                s += 1
        if b == 0 or d == 0:
            b, d = 0, 1
        elif d == 1:
            p, b = p + b, 0
        if q < 0:
            p, b, q = -p, -b, -q
        g = math.gcd(math.gcd(p, b), q)
        self.p, self.b, self.d, self.q = p // g, b // g, d, q // g

    @classmethod
    def from_fraction(cls, x):
        x = Fraction(x)
        return cls(x.numerator, 0, 1, x.denominator)

    @property
    def is_rational(self):
        return self.b == 0

    def as_fraction(self):
        if not self.is_rational:
            raise ValueError("not rational")
        return Fraction(self.p, self.q)

    def value(self, dps=None):
        with mpmath.workdps(_dps(dps) + 5):
            v = (self.p + self.b * mpmath.sqrt(self.d)) / mpmath.mpf(self.q)
        return v

    def _compatible(self, other):
        if not (self.is_rational or other.is_rational or self.d == other.d):
            raise ValueError("surds with different radicands cannot be added exactly")
        return self.d if not self.is_rational else other.d

    def __add__(self, other):
        if not isinstance(other, QuadraticSurd):
            other = QuadraticSurd.from_fraction(other)
        d = self._compatible(other)
        return QuadraticSurd(self.p * other.q + other.p * self.q,
                             self.b * other.q + other.b * self.q, d, self.q * other.q)

    def __neg__(self):
        return QuadraticSurd(-self.p, -self.b, self.d, self.q)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        k = Fraction(k)
        return QuadraticSurd(self.p * k.numerator, self.b * k.numerator, self.d,
                             self.q * k.denominator)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, QuadraticSurd)
                and (self.p, self.b, self.d, self.q) == (other.p, other.b, other.d, other.q))

    def __hash__(self):
        return hash((self.p, self.b, self.d, self.q))

    def __repr__(self):
        return f"QuadraticSurd({self.p}, {self.b}, {self.d}, {self.q})"

    def _ge_integer(self, a):
        # self >= a  <=>  b*sqrt(d) >= a*q - p
        t = a * self.q - self.p
        if self.b == 0:
            return t <= 0
        if self.b > 0:
            return t <= 0 or t * t <= self.b * self.b * self.d
        return t < 0 and t * t >= self.b * self.b * self.d

    def floor(self):
        a = int(mpmath.floor(self.value(30)))
        while not self._ge_integer(a):
            a -= 1
        while self._ge_integer(a + 1):
            a += 1
        return a

    def quotients(self):
        """Generate the partial quotients ``a0, a1, ...`` (finite iff rational)."""
        p, b, d, q = self.p, self.b, self.d, self.q
        while True:
            x = QuadraticSurd.__new__(QuadraticSurd)
            x.p, x.b, x.d, x.q = p, b, d, q
            a = x.floor()
            yield a
            p -= a * q
            if b == 0:
                if p == 0:
                    return
                p, q = q, p
                if q < 0:
                    p, q = -p, -q
                continue
            # 1 / ((p + b sqrt d) / q) = q (p - b sqrt d) / (p^2 - b^2 d)
            p, b, q = q * p, -q * b, p * p - b * b * d
            if q < 0:
                p, b, q = -p, -b, -q
            g = math.gcd(math.gcd(p, b), q)
            p, b, q = p // g, b // g, q // g


class _EulerNumber:
    """Euler's number, whose continued fraction is ``[2; 1, 2, 1, 1, 4, 1, 1, 6, ...]``."""

    def value(self, dps=None):
        with mpmath.workdps(_dps(dps) + 5):
            return +mpmath.e

    def quotients(self):
        yield 2
        k = 1
        while True:
            yield 1
            yield 2 * k
            yield 1
            k += 1

    def __repr__(self):
        return "_EulerNumber()"


EULER = _EulerNumber()

NAMED_IRRATIONALS = {
    "sqrt2": QuadraticSurd(0, 1, 2),
    "sqrt3": QuadraticSurd(0, 1, 3),
    "sqrt5": QuadraticSurd(0, 1, 5),
    "golden": QuadraticSurd(1, 1, 5, 2),
    "e": EULER,
    "pi": None,
}


@dataclass(frozen=True)
class RealWithError:
    """An extended-precision real ``value`` known to within ``abs_error``.

    ``exact`` optionally holds a :class:`QuadraticSurd` or Euler's number; the
    continued fraction is then generated exactly instead of from the interval.
    """

    value: mpmath.mpf
    abs_error: float
    exact: object = None
    label: str = ""

    @classmethod
    def from_exact(cls, exact, dps=None, label=""):
        dps = _dps(dps)
        v = exact.value(dps)
        if isinstance(exact, QuadraticSurd) and exact.is_rational \
                and _mpf_to_fraction(v) == exact.as_fraction():
            err = 0.0
        else:
            err = float(mpmath.mpf(10) ** (-dps - 2) * max(1, abs(v)))
        return cls(v, err, exact, label or repr(exact))

    @classmethod
    def from_fraction(cls, x, dps=None):
        return cls.from_exact(QuadraticSurd.from_fraction(x), dps, label=str(Fraction(x)))

    @classmethod
    def named(cls, name, dps=None):
        """``sqrt2``, ``sqrt3``, ``sqrt5``, ``golden``, ``e`` or ``pi``."""
        try:
            exact = NAMED_IRRATIONALS[name]
        except KeyError:
            raise DomainError(f"unknown named constant {name!r}; choose from "
                              f"{sorted(NAMED_IRRATIONALS)}") from None
        if exact is None:
            dps = _dps(dps)
            with mpmath.workdps(dps + 5):
                v = +mpmath.pi
            return cls(v, float(mpmath.mpf(10) ** (-dps)), None, name)
        return cls.from_exact(exact, dps, label=name)

    @classmethod
    def from_float(cls, x, abs_error=None):
        """A double taken at face value; default error is half an ulp."""
        x = float(x)
        if abs_error is None:
            abs_error = math.ulp(x) / 2
        return cls(mpmath.mpf(x), float(abs_error), None, repr(x))

    @classmethod
    def parse(cls, text, abs_error=None, dps=None):
        """Named constant, fraction ``p/q`` or decimal string."""
        text = text.strip()
        if text in NAMED_IRRATIONALS:
            return cls.named(text, dps)
        if "/" in text:
            return cls.from_fraction(Fraction(text), dps)
        dps = _dps(dps)
        with mpmath.workdps(dps + 5):
            v = mpmath.mpf(text)
        if abs_error is None:
            frac_digits = len(text.split(".")[1]) if "." in text else 0
            abs_error = 0.5 * 10.0 ** (-frac_digits)
        return cls(v, float(abs_error), None, text)

    def scaled(self, k):
        """``k * self`` for an integer ``k``; exactness is kept for surds."""
        k = int(k)
        exact = self.exact * k if isinstance(self.exact, QuadraticSurd) else None
        with mpmath.workdps(DEFAULT_DPS + 10):
            v = self.value * k
        return RealWithError(v, abs(k) * self.abs_error, exact, f"{k}*{self.label}")

    def __neg__(self):
        exact = -self.exact if isinstance(self.exact, QuadraticSurd) else None
        return RealWithError(-self.value, self.abs_error, exact, f"-{self.label}")

    def __sub__(self, other):
        exact = None
        if isinstance(self.exact, QuadraticSurd) and isinstance(other.exact, QuadraticSurd):
            try:
                exact = self.exact - other.exact
            except ValueError:
                exact = None
        with mpmath.workdps(DEFAULT_DPS + 10):
            v = self.value - other.value
        return RealWithError(v, self.abs_error + other.abs_error, exact,
                             f"({self.label})-({other.label})")

    def to_fraction(self):
        """The stored value as an exact dyadic rational (exact rationals returned as is)."""
        if isinstance(self.exact, QuadraticSurd) and self.exact.is_rational:
            return self.exact.as_fraction()
        return _mpf_to_fraction(self.value)


def _mpf_to_fraction(v):
    sign, man, exp, _ = mpmath.mpf(v)._mpf_
    if man == 0:
        return Fraction(0)
    num = -int(man) if sign else int(man)
    return Fraction(num * 2**exp) if exp >= 0 else Fraction(num, 2**-exp)


@dataclass(frozen=True)
class ContinuedFraction:
    a0: int
    quotients: tuple
    certified_depth: int
    terminated: bool = False
    theta: RealWithError = field(default=None, repr=False, compare=False)

    def terms(self):
        return (self.a0,) + self.quotients[: self.certified_depth]

    def evaluate(self, depth=None):
        """Exact value of the truncated expansion ``[a0; a1, ..., a_depth]``."""
        terms = self.terms() if depth is None else self.terms()[: depth + 1]
        x = Fraction(terms[-1])
        for a in reversed(terms[:-1]):
            x = a + 1 / x
        return x


def continued_fraction(theta, max_depth=20, dps=None):
    """Partial quotients of ``theta``, certified against its error bar.

    Exact inputs use integer arithmetic.  Otherwise the enclosing interval
    ``[value - abs_error, value + abs_error]`` is pushed through the Gauss map
    with outward rounding and a quotient is emitted only while the interval
    has a unique floor.
    """
    if isinstance(theta.exact, (QuadraticSurd, _EulerNumber)):
        gen = theta.exact.quotients()
        a0 = next(gen)
        quotients = []
        terminated = True
        for a in gen:
            if len(quotients) >= max_depth:
                terminated = False
                break
            quotients.append(a)
        return ContinuedFraction(a0, tuple(quotients), len(quotients), terminated, theta)

    dps = _dps(dps)
    iv = mpmath.iv
    mp = mpmath.mp
    with mpmath.workdps(dps + 10):
        iv.dps = dps + 10
        x = iv.mpf(theta.value) + iv.mpf([-theta.abs_error, theta.abs_error])
        terms = []
        terminated = False
        while len(terms) < max_depth + 1:
            lo, hi = mp.make_mpf(x._mpi_[0]), mp.make_mpf(x._mpi_[1])
            a = int(mp.floor(lo))
            if int(mp.floor(hi)) != a:
                break
            terms.append(a)
            if lo == a:
                if hi == a:
                    terminated = True
                break
            x = 1 / (x - a)
    if not terms:
        raise PrecisionExhausted(
            f"error bar {theta.abs_error:.3g} spans several integers; raise the precision")
    a0, quotients = terms[0], tuple(terms[1:])
    if not quotients and not terminated and max_depth > 0:
        raise PrecisionExhausted(
            f"no partial quotient of {theta.label or theta.value} is certified with error "
            f"{theta.abs_error:.3g}; raise the precision")
    return ContinuedFraction(a0, quotients, len(quotients), terminated, theta)


@dataclass(frozen=True)
class Convergent:
    k: int
    p: int
    q: int
    signed_err: mpmath.mpf  # q*theta - p

    @property
    def error(self):
        return float(self.signed_err)


def convergents(cf, dps=None, max_denominator=MAX_DENOMINATOR):
    """Convergents ``p_k / q_k`` for ``k = 0 .. certified_depth``."""
    dps = _dps(dps)
    out = []
    p2, p1, q2, q1 = 0, 1, 1, 0
    for k, a in enumerate(cf.terms()):
        p, q = a * p1 + p2, a * q1 + q2
        if q > max_denominator:
            raise NumericalRangeError(
                f"convergent denominator exceeds {max_denominator} at depth {k}; reduce the depth",
                index=k)
        out.append((k, p, q))
        p2, p1, q2, q1 = p1, p, q1, q
    theta = cf.theta
    q_max = out[-1][2]
    work = dps + 2 * len(str(q_max)) + 10
    if theta is not None and theta.exact is not None:
        value = theta.exact.value(work)
    elif theta is not None:
        value = theta.value
    else:
        value = None
    result = []
    with mpmath.workdps(work):
        for k, p, q in out:
            err = q * value - p if value is not None else mpmath.mpf("nan")
            result.append(Convergent(k, p, q, err))
    return result


def frac_mul(n, theta, dps=None):
    """``frac(n * theta)`` with propagated error ``|n| * abs_error``."""
    n = int(n)
    err = abs(n) * theta.abs_error
    if err >= 0.5:
        raise PrecisionExhausted(
            f"|n| * abs_error = {err:.3g} makes frac(n*theta) meaningless; raise the precision")
    work = _dps(dps) + len(str(abs(n))) + 5
    value = theta.exact.value(work) if theta.exact is not None else theta.value
    with mpmath.workdps(work):
        v = mpmath.frac(n * value)
    return RealWithError(v, err, None, f"frac({n}*{theta.label})")


@dataclass(frozen=True)
class Witnesses:
    """Increasing indices and their circle distances to ``target`` (in turns)."""

    indices: tuple
    distances: tuple
    target: float
    shortfall: int = 0

    @property
    def complete(self):
        return self.shortfall == 0

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


def near_zero_subsequence(theta, count=None, max_index=None, dps=None):
    """Convergent denominators ``q_1 < q_2 < ...`` of ``theta``.

    ``count`` limits the number of terms, ``max_index`` their size; at least
    one must be given.  Raises :class:`PrecisionExhausted` when the certified
    expansion ends before ``count`` terms are available.
    """
    if count is None and max_index is None:
        raise ValueError("give count or max_index")
    if count == 0:
        return Witnesses((), (), 0.0)
    depth = (count or 16) + 8
    while True:
        cf = continued_fraction(theta, depth, dps)
        convs = convergents(cf, dps)
        idx, dist = [], []
        for prev, c in zip(convs, convs[1:]):
            if c.q <= prev.q:
                continue
            if max_index is not None and c.q > max_index:
                break
            if count is not None and len(idx) >= count:
                break
            e = abs(float(c.signed_err)) % 1.0
            idx.append(c.q)
            dist.append(min(e, 1.0 - e))
        done_by_size = max_index is not None and convs[-1].q > max_index
        if (count is not None and len(idx) >= count) or done_by_size:
            return Witnesses(tuple(idx), tuple(dist), 0.0)
        if cf.terminated:
            return Witnesses(tuple(idx), tuple(dist), 0.0,
                             0 if count is None else count - len(idx))
        if cf.certified_depth < depth:
            if count is None:
                return Witnesses(tuple(idx), tuple(dist), 0.0)
            raise PrecisionExhausted(
                f"only {len(idx)} of {count} near-zero witnesses are certified at depth "
                f"{cf.certified_depth}; raise the precision")
        depth *= 2


def _min_multiple_in_range(a, m, lo, hi):
    """Least ``x >= 0`` with ``lo <= (a*x) mod m <= hi`` (``0 <= lo <= hi < m``), else None."""
    a %= m
    if lo == 0:
        return 0
    if a == 0:
        return None
    x = -(-lo // a)
    if a * x <= hi:
        return x
    # no multiple of a in [lo, hi]: the wrap count y solves the same problem mod a
    y = _min_multiple_in_range(m % a, a, (-hi) % a, (-lo) % a)
    if y is None:
        return None
    x = -(-(m * y + lo) // a)
    return x if a * x - m * y <= hi else None


def first_hit(a, b, m, lo, hi):
    """Least ``x >= 0`` with ``lo <= (a*x + b) mod m <= hi``, else None.

    Euclid-style recursion on ``(a, m)``; the number of steps is that of the
    continued fraction of ``a/m``.
    """
    if hi - lo + 1 >= m:
        return 0
    lo2, hi2 = (lo - b) % m, (hi - b) % m
    if lo2 > hi2:
        return 0  # interval wraps through 0, so x = 0 already lands in it
    return _min_multiple_in_range(a, m, lo2, hi2)


def _half_records_accelerated(theta_q, count, bound):
    P, Q = theta_q.numerator % theta_q.denominator, theta_q.denominator

    def dist2(n):
        return abs(2 * ((n * P) % Q) - Q)  # 2Q * distance to 1/2

    best = dist2(1)
    out = [1] if best == 0 else []
    n = 1
    while len(out) < count:
        if best == 0:
            if Q % 2:
                break
            lo = hi = Q // 2
        else:
            lo, hi = (Q - best) // 2 + 1, (Q + best - 1) // 2
            if lo > hi:
                break
        x = first_hit(P, ((n + 1) * P) % Q, Q, lo, hi)
        if x is None or n + 1 + x > bound:
            break
        n += 1 + x
        best = dist2(n)
        out.append(n)
    return out, [dist2(k) / (2 * Q) for k in out]


def _half_records_exhaustive(theta, theta_q, count, bound, chunk=1 << 16):
    # exact scan on theta = P/Q: the distance of frac(n theta) to 1/2 is
    # |2 (n P mod Q) - Q| / (2 Q), compared through its integer numerator
    P, Q = theta_q.numerator % theta_q.denominator, theta_q.denominator
    dtype = np.int64 if Q * bound < 2**62 else object
    out, dist = [], []
    best = None
    for start in range(1, bound + 1, chunk):
        ns = np.arange(start, min(start + chunk, bound + 1), dtype=np.int64).astype(dtype)
        num = np.abs(2 * ((ns * P) % Q) - Q)
        for k in range(len(ns)):
            d = num[k]
            n = int(ns[k])
            if n == 1:
                best = d
                if d != 0:  # n = 1 is the baseline, not a record
                    continue
            elif d >= best and d != 0:
                continue
            best = d
            out.append(n)
            dist.append(float(Fraction(int(d), 2 * Q)))
            if len(out) == count:
                return out, dist
    return out, dist


def near_half_subsequence(theta, count, search_bound=DEFAULT_SEARCH_BOUND,
                          method="accelerated", dps=None):
    """Successive record-breakers ``n_1 < n_2 < ...`` of ``|frac(n theta) - 1/2|``.

    ``n = 1`` is the baseline; every later ``n <= search_bound`` whose distance
    to ``1/2`` beats all earlier ones is a witness.  If ``1/2`` is hit exactly
    (rational ``theta`` with even denominator) every exact hit is returned.

    ``method="accelerated"`` jumps from record to record with :func:`first_hit`
    on the exact rational value of ``theta``; ``"exhaustive"`` scans every
    ``n``.  The two agree.  Fewer than ``count`` witnesses below the bound are
    reported through ``shortfall``.
    """
    if count < 0 or search_bound < 0:
        raise ValueError("count and search_bound must be non-negative")
    if count == 0 or search_bound < 1:
        return Witnesses((), (), 0.5, count)
    if isinstance(theta.exact, QuadraticSurd) and theta.exact.is_rational:
        theta_q = theta.exact.as_fraction()
    elif theta.exact is not None:
        theta_q = _mpf_to_fraction(theta.exact.value(_dps(dps) + 10))
    else:
        theta_q = theta.to_fraction()
    if method == "accelerated":
        idx, dist = _half_records_accelerated(theta_q, count, search_bound)
    elif method == "exhaustive":
        idx, dist = _half_records_exhaustive(theta, theta_q, count, search_bound)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Witnesses(tuple(idx), tuple(dist), 0.5, count - len(idx))


def witness_indices(theta, search_bound=DEFAULT_SEARCH_BOUND, dps=None):
    """All near-zero and near-half witnesses of ``theta`` up to ``search_bound``."""
    near_zero = near_zero_subsequence(theta, max_index=search_bound, dps=dps)
    near_half = near_half_subsequence(theta, search_bound, search_bound, dps=dps)
    return near_zero, near_half
