"""The disk map ``f``, the plane map ``g`` and the conjugacy ``h`` between them.

Points are stored in polar form with the angle measured in turns.  The radial
coordinate is chosen so that both maps act on it as a translation:

* on the plane the radial coordinate is ``log|z|``;
* on the disk it is the log-odds ``phi(|z|) = log(|z| / (1 - |z|))``.

With that choice ``f^n`` and ``g^n`` both send ``(t, a)`` to
``(t + n, a + n*t mod 1)`` and ``h`` leaves the coordinates untouched.  The
log-odds form also keeps disk points strictly inside the unit disk for every
``n``: ``log|f^n z|`` itself underflows to ``-0.0`` once ``n`` exceeds ~745.

The literal complex-arithmetic formulas are kept alongside as ``*_cartesian``
functions; the conjugacy residual is measured with those.
"""

from dataclasses import dataclass
import enum
import math

import mpmath
import numpy as np

from liyorke import _dd
from liyorke.errors import DomainError, NumericalRangeError, PrecisionExhausted

DEFAULT_PRECISION_DIGITS = 32
MAX_ITERATE = 10**7
TWO_PI = 2.0 * math.pi


class Space(enum.Enum):
    DISK = "disk"
    PLANE = "plane"


def phi(r):
    """Log-odds ``log(r / (1 - r))`` on ``(0, 1)``; mpmath input stays mpmath."""
    if isinstance(r, mpmath.mpf):
        if not 0 < r < 1:
            raise DomainError(f"phi is defined on (0, 1), got {r}")
        return mpmath.log(r / (1 - r))
    r = float(r)
    if not 0.0 < r < 1.0:
        raise DomainError(f"phi is defined on (0, 1), got {r!r}")
    return math.log(r) - math.log1p(-r)


def phi_inverse(t):
    """Logistic function ``1 / (1 + exp(-t))``, the inverse of :func:`phi`.

    Float input returns a float (which rounds to 1.0 for ``t > ~37``); pass an
    ``mpmath.mpf`` to keep the gap to 1 visible.
    """
    if isinstance(t, mpmath.mpf):
        return 1 / (1 + mpmath.exp(-t))
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"phi_inverse needs a finite argument, got {t!r}")
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def phi_inverse_complement(t):
    """``1 - phi_inverse(t)`` without cancellation."""
    return phi_inverse(-t)


@dataclass(frozen=True)
class PlanePoint:
    """A point of the open unit disk or of the plane, in polar form.

    ``radial`` is the log-odds of the modulus for disk points and the log
    modulus for plane points; it is ignored for the origin.
    """

    space: Space
    radial: float = 0.0
    angle_turns: float = 0.0
    is_origin: bool = False

    def __post_init__(self):
        if self.is_origin:
            return
        if not math.isfinite(self.radial):
            raise DomainError(f"radial coordinate must be finite, got {self.radial!r}")
        if not 0.0 <= self.angle_turns < 1.0:
            raise DomainError(f"angle_turns must lie in [0, 1), got {self.angle_turns!r}")

    @classmethod
    def origin(cls, space):
        return cls(space, 0.0, 0.0, True)

    @classmethod
    def from_polar(cls, modulus, angle_turns, space):
        modulus = float(modulus)
        if modulus < 0 or not math.isfinite(modulus):
            raise DomainError(f"modulus must be finite and non-negative, got {modulus!r}")
        if modulus == 0.0:
            return cls.origin(space)
        angle = float(_dd.frac(angle_turns))
        if space is Space.DISK:
            if modulus >= 1.0:
                raise DomainError(f"disk points need |z| < 1, got {modulus!r}")
            return cls(space, phi(modulus), angle)
        return cls(space, math.log(modulus), angle)

    @classmethod
    def from_complex(cls, z, space):
        z = complex(z)
        return cls.from_polar(abs(z), math.atan2(z.imag, z.real) / TWO_PI, space)

    @property
    def log_modulus(self):
        if self.is_origin:
            return -math.inf
        if self.space is Space.DISK:
            return -float(np.logaddexp(0.0, -self.radial))
        return self.radial

    @property
    def modulus(self):
        if self.is_origin:
            return 0.0
        if self.space is Space.DISK:
            return phi_inverse(self.radial)
        try:
            return math.exp(self.radial)
        except OverflowError:
            raise NumericalRangeError(f"|z| = exp({self.radial}) overflows") from None

    def to_complex(self):
        if self.is_origin:
            return 0j
        return self.modulus * complex(math.cos(TWO_PI * self.angle_turns),
                                      math.sin(TWO_PI * self.angle_turns))


@dataclass(frozen=True)
class IterateRequest:
    """Iteration count plus working precision for the angle product ``n * t``.

    Up to 16 digits the product is a plain double multiply, up to 32 it is
    evaluated exactly as a double-double, beyond that with mpmath.
    """

    n: int
    precision_digits: int = DEFAULT_PRECISION_DIGITS

    def __post_init__(self):
        if self.precision_digits < 1:
            raise DomainError("precision_digits must be positive")
        if abs(self.n) > MAX_ITERATE:
            raise DomainError(f"|n| = {abs(self.n)} exceeds the iterate limit {MAX_ITERATE}")
        if abs(self.n) > 10**4 and self.precision_digits < 30:
            raise PrecisionExhausted(
                f"precision_digits >= 30 is required for |n| > 10**4 (n = {self.n}, "
                f"precision_digits = {self.precision_digits})")


def _as_request(n):
    return n if isinstance(n, IterateRequest) else IterateRequest(int(n))


def advance_angle(angle, n, rate, precision_digits=DEFAULT_PRECISION_DIGITS):
    """``frac(angle + n * rate)`` with the product at the requested precision."""
    if precision_digits <= 16:
        return _dd.frac(np.asarray(angle) + np.asarray(n, dtype=np.float64) * rate)
    if precision_digits <= 32:
        return _dd.frac_mul_add(angle, n, rate)
    with mpmath.workdps(precision_digits):
        rate_mp = mpmath.mpf(rate)
        angle_mp = mpmath.mpf(float(angle))
        out = [float(mpmath.frac(angle_mp + int(k) * rate_mp)) for k in np.atleast_1d(n)]
    out = _dd.frac(np.array(out))
    return out if np.ndim(n) else out[0]


def _translate(z, req, space):
    if z.space is not space:
        raise DomainError(f"expected a {space.value} point, got a {z.space.value} point")
    if z.is_origin:
        return z
    angle = float(advance_angle(z.angle_turns, req.n, z.radial, req.precision_digits))
    return PlanePoint(space, z.radial + req.n, angle)


def f_power(z, n):
    """``f^n(z)`` on the disk for any signed ``n``.

    The modulus of the result is ``r / (r + (1 - r) e^{-n})`` and the angle
    advances by ``n * phi(r)`` turns.
    """
    return _translate(z, _as_request(n), Space.DISK)


def g_power(z, n):
    """``g^n(z)`` on the plane: ``log|z|`` grows by ``n``, the angle by ``n * log|z|``."""
    return _translate(z, _as_request(n), Space.PLANE)


def h_apply(z):
    """Conjugacy ``h(z) = z / (1 - |z|)`` from the disk onto the plane."""
    if z.space is not Space.DISK:
        raise DomainError("h is defined on the disk")
    if z.is_origin:
        return PlanePoint.origin(Space.PLANE)
    # log|h(z)| = log r - log(1 - r) is exactly the disk radial coordinate
    return PlanePoint(Space.PLANE, z.radial, z.angle_turns)


def h_inverse(w):
    """``h^{-1}(w) = w / (1 + |w|)`` from the plane back onto the disk."""
    if w.space is not Space.PLANE:
        raise DomainError("h^{-1} is defined on the plane")
    if w.is_origin:
        return PlanePoint.origin(Space.DISK)
    return PlanePoint(Space.DISK, w.radial, w.angle_turns)


def orbit_coordinates(z, ns, sign=1, precision_digits=DEFAULT_PRECISION_DIGITS):
    """Radial coordinates and angles of ``F^{sign*n}(z)`` for every ``n`` in ``ns``.

    Works for both ``f`` and ``g`` since they share the translation form.
    """
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size:
        IterateRequest(int(np.max(np.abs(ns))), precision_digits)
    if z.is_origin:
        return np.full(ns.shape, -np.inf), np.zeros(ns.shape)
    steps = sign * ns
    radial = z.radial + steps.astype(np.float64)
    angle = advance_angle(z.angle_turns, steps, z.radial, precision_digits)
    return radial, np.asarray(angle, dtype=np.float64)


def coordinates_to_complex(radial, angle, space):
    """Cartesian values for arrays of polar coordinates (``-inf`` radial is the origin)."""
    radial = np.asarray(radial, dtype=np.float64)
    if space is Space.DISK:
        modulus = np.where(np.isneginf(radial), 0.0, _expit(radial))
    else:
        with np.errstate(over="ignore"):
            modulus = np.exp(radial)
        if np.any(np.isinf(modulus)):
            bad = int(np.argmax(np.isinf(modulus)))
            raise NumericalRangeError(
                f"plane modulus exp({radial[bad]:.6g}) overflows at position {bad}", index=bad)
    return modulus * np.exp(1j * TWO_PI * np.asarray(angle))


def _expit(t):
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def distance(a, b):
    """Euclidean distance between two points of the same space."""
    if a.space is not b.space:
        raise DomainError("points live in different spaces")
    return abs(a.to_complex() - b.to_complex())


# Literal complex formulas, vectorised over numpy arrays.

def _rotation(t):
    return np.exp(1j * TWO_PI * t)


def f_cartesian(z):
    z = np.asarray(z, dtype=np.complex128)
    r = np.abs(z)
    safe = np.where(r == 0, 0.5, r)
    out = math.e * z / (math.e * safe - safe + 1) * _rotation(np.log(safe / (1 - safe)))
    return np.where(r == 0, 0j, out)


def f_inverse_cartesian(w):
    w = np.asarray(w, dtype=np.complex128)
    r = np.abs(w)
    safe = np.where(r == 0, 0.5, r)
    out = w / math.e / (safe / math.e - safe + 1) * _rotation(-np.log(safe / (1 - safe)))
    return np.where(r == 0, 0j, out)


def g_cartesian(z):
    z = np.asarray(z, dtype=np.complex128)
    r = np.abs(z)
    safe = np.where(r == 0, 1.0, r)
    return np.where(r == 0, 0j, math.e * z * _rotation(np.log(safe)))


def g_inverse_cartesian(w):
    w = np.asarray(w, dtype=np.complex128)
    r = np.abs(w)
    safe = np.where(r == 0, 1.0, r)
    return np.where(r == 0, 0j, w / math.e * _rotation(-np.log(safe)))


def h_cartesian(z):
    z = np.asarray(z, dtype=np.complex128)
    return z / (1 - np.abs(z))


def h_inverse_cartesian(w):
    w = np.asarray(w, dtype=np.complex128)
    return w / (1 + np.abs(w))


def polar_grid(radial_steps=100, angular_steps=100, r_max=0.99):
    """Grid of ``radial_steps`` moduli in ``[0, r_max]`` times ``angular_steps`` angles."""
    if not 0 < r_max <= 1 - 1e-6:
        raise DomainError(f"r_max must lie in (0, 1 - 1e-6], got {r_max!r}")
    r = np.linspace(0.0, r_max, radial_steps)
    a = np.arange(angular_steps) / angular_steps
    rr, aa = np.meshgrid(r, a, indexing="ij")
    return rr * _rotation(aa)


def conjugacy_residuals(radial_steps=100, angular_steps=100, r_max=0.99):
    """Grid points and ``|h(f(z)) - g(h(z))|`` at each of them."""
    z = polar_grid(radial_steps, angular_steps, r_max)
    return z, np.abs(h_cartesian(f_cartesian(z)) - g_cartesian(h_cartesian(z)))


def conjugacy_residual(radial_steps=100, angular_steps=100, r_max=0.99):
    return float(np.max(conjugacy_residuals(radial_steps, angular_steps, r_max)[1]))


def orbit_transport_residual(points, n_max, precision_digits=DEFAULT_PRECISION_DIGITS):
    """Max over ``points`` and ``0 <= n <= n_max`` of ``|h(f^n z) - g^n(h z)|``."""
    worst = 0.0
    for z in points:
        w = h_apply(z)
        for n in range(n_max + 1):
            req = IterateRequest(n, precision_digits)
            lhs = h_apply(f_power(z, req)).to_complex()
            rhs = g_power(w, req).to_complex()
            worst = max(worst, abs(lhs - rhs))
    return worst
