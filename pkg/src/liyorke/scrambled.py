"""Finite samples of a scrambled set for the disk map.

A set of radii whose log-odds differ pairwise by irrational numbers is
scrambled for ``f``.  The certified family puts the log-odds on an arithmetic
progression ``center + j * base`` with an irrational ``base``, so every
difference is an integer multiple of ``base`` and its continued fraction is
known exactly.  The random family draws log-odds uniformly; irrationality of
the differences is then only almost sure.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import mpmath
import numpy as np

from liyorke.diophantine import DEFAULT_SEARCH_BOUND, RealWithError, witness_indices
from liyorke.dynamics import SystemHandle, liyorke_verdict
from liyorke.errors import DomainError
from liyorke.plane import PlanePoint, Space, phi_inverse


@dataclass(frozen=True)
class CertifiedLattice:
    base: str
    offsets: tuple
    center: float


@dataclass(frozen=True)
class Random:
    seed: int
    low: float = -3.0
    high: float = 3.0


@dataclass(frozen=True)
class ScrambledFamily:
    points: tuple
    phi_values: tuple
    provenance: object

    def __len__(self):
        return len(self.points)

    def disk_point(self, j, angle_turns=0.0):
        return PlanePoint(Space.DISK, self.phi_values[j], angle_turns)

    def disk_points(self, angle_turns=0.0):
        return [self.disk_point(j, angle_turns) for j in range(len(self))]

    def pairs(self):
        n = len(self)
        return [(j, k) for j in range(n) for k in range(j + 1, n)]


def certified_family(count, base="sqrt2", center=0.0, offsets=None):
    """Radii with log-odds ``center + offsets[j] * base``.

    ``offsets`` defaults to ``0, 1, ..., count - 1`` and must be distinct.
    """
    if offsets is None:
        offsets = range(count)
    offsets = tuple(int(o) for o in offsets)
    if len(offsets) != count:
        raise DomainError("len(offsets) must equal count")
    if count < 2:
        raise DomainError("a family needs at least two points")
    if len(set(offsets)) != count:
        raise DomainError("offsets must be distinct")
    base_value = RealWithError.named(base).value
    with mpmath.workdps(50):
        center_mp = mpmath.mpf(Fraction(center).numerator) / Fraction(center).denominator
        phis = tuple(float(center_mp + o * base_value) for o in offsets)
    points = tuple(phi_inverse(t) for t in phis)
    return ScrambledFamily(points, phis, CertifiedLattice(base, offsets, float(center)))


def random_family(count, seed, low=-3.0, high=3.0):
    """Log-odds drawn uniformly from ``[low, high]`` with a seeded generator."""
    if count < 2:
        raise DomainError("a family needs at least two points")
    rng = np.random.default_rng(seed)
    phis = rng.uniform(low, high, count)
    while len(np.unique(phis)) < count:
        phis = rng.uniform(low, high, count)
    phis = tuple(float(t) for t in phis)
    return ScrambledFamily(tuple(phi_inverse(t) for t in phis), phis, Random(seed, low, high))


def pairwise_theta(family, j, k):
    """Rotation-number gap ``phi(x_j) - phi(x_k)`` as a :class:`RealWithError`."""
    if j == k:
        raise DomainError("pairwise_theta needs two distinct indices")
    prov = family.provenance
    if isinstance(prov, CertifiedLattice):
        return RealWithError.named(prov.base).scaled(prov.offsets[j] - prov.offsets[k])
    a, b = family.phi_values[j], family.phi_values[k]
    with mpmath.workdps(40):
        value = mpmath.mpf(a) - mpmath.mpf(b)
    err = 2 * max(math.ulp(a), math.ulp(b))
    return RealWithError(value, err, None, f"phi[{j}]-phi[{k}]")


@dataclass(frozen=True)
class PairReport:
    j: int
    k: int
    theta: RealWithError
    near_zero: object
    near_half: object
    verdict: object


def pair_verdict(family, j, k, horizon=10_000, search_bound=DEFAULT_SEARCH_BOUND, **kwargs):
    """Li-Yorke verdict for ``f`` on points ``j`` and ``k`` with Diophantine hints."""
    theta = pairwise_theta(family, j, k)
    near_zero, near_half = witness_indices(theta, search_bound)
    hints = sorted(set(near_zero.indices) | set(near_half.indices))
    v = liyorke_verdict(SystemHandle.disk_f(), family.disk_point(j), family.disk_point(k),
                        horizon, hints, **kwargs)
    return PairReport(j, k, theta, near_zero, near_half, v)
