"""Orbit engine shared by the plane maps and the truncated operator.

Distances ``d(F^n x, F^n y)`` are sampled on a uniform grid merged with hint
indices (typically Diophantine witnesses), liminf/limsup are estimated on a
trailing window, and a three-way Li-Yorke verdict is rendered.
"""

from dataclasses import dataclass, field
import enum
import math

import numpy as np

from liyorke import plane
from liyorke.errors import DomainError, NumericalRangeError
from liyorke.operator import ParameterSchedule, TruncatedVector, truncated_apply
from liyorke.plane import IterateRequest, PlanePoint, Space

MAX_ITERATE = plane.MAX_ITERATE
DELTA_LOW = 0.02
DELTA_HIGH = 1.9


class SystemKind(enum.Enum):
    DISK_F = "disk-f"
    DISK_F_INVERSE = "disk-f-inv"
    PLANE_G = "plane-g"
    PLANE_G_INVERSE = "plane-g-inv"
    OPERATOR = "operator"
    OPERATOR_INVERSE = "operator-inv"


class Metric(enum.Enum):
    EUCLIDEAN_PLANE = "euclidean-plane"
    HILBERT_NORM = "hilbert-norm"


_INVERSES = {
    SystemKind.DISK_F: SystemKind.DISK_F_INVERSE,
    SystemKind.DISK_F_INVERSE: SystemKind.DISK_F,
    SystemKind.PLANE_G: SystemKind.PLANE_G_INVERSE,
    SystemKind.PLANE_G_INVERSE: SystemKind.PLANE_G,
    SystemKind.OPERATOR: SystemKind.OPERATOR_INVERSE,
    SystemKind.OPERATOR_INVERSE: SystemKind.OPERATOR,
}

_OPERATOR_KINDS = (SystemKind.OPERATOR, SystemKind.OPERATOR_INVERSE)
_INVERSE_KINDS = (SystemKind.DISK_F_INVERSE, SystemKind.PLANE_G_INVERSE, SystemKind.OPERATOR_INVERSE)


@dataclass(frozen=True)
class SystemHandle:
    """Immutable description of one invertible map."""

    kind: SystemKind
    schedule: ParameterSchedule = None
    block_count: int = None
    precision_digits: int = plane.DEFAULT_PRECISION_DIGITS
    max_iterate: int = MAX_ITERATE

    def __post_init__(self):
        if self.kind in _OPERATOR_KINDS:
            if self.schedule is None:
                raise DomainError("operator handles need a parameter schedule")
            if self.block_count is None:
                object.__setattr__(self, "block_count", len(self.schedule.blocks))
            if not 1 <= self.block_count <= len(self.schedule.blocks):
                raise DomainError(f"block_count must lie in 1..{len(self.schedule.blocks)}")

    @classmethod
    def disk_f(cls, **kw):
        return cls(SystemKind.DISK_F, **kw)

    @classmethod
    def plane_g(cls, **kw):
        return cls(SystemKind.PLANE_G, **kw)

    @classmethod
    def operator(cls, schedule, block_count=None, inverse=False, **kw):
        kind = SystemKind.OPERATOR_INVERSE if inverse else SystemKind.OPERATOR
        return cls(kind, schedule, block_count, **kw)

    @property
    def metric(self):
        return Metric.HILBERT_NORM if self.kind in _OPERATOR_KINDS else Metric.EUCLIDEAN_PLANE

    @property
    def space(self):
        if self.kind in (SystemKind.DISK_F, SystemKind.DISK_F_INVERSE):
            return Space.DISK
        if self.kind in (SystemKind.PLANE_G, SystemKind.PLANE_G_INVERSE):
            return Space.PLANE
        return None

    @property
    def sign(self):
        return -1 if self.kind in _INVERSE_KINDS else 1

    def inverse(self):
        return SystemHandle(_INVERSES[self.kind], self.schedule, self.block_count,
                            self.precision_digits, self.max_iterate)


def _check_state(system, x):
    if system.metric is Metric.HILBERT_NORM:
        if not isinstance(x, TruncatedVector):
            raise DomainError("operator states are TruncatedVector instances")
        return
    if not isinstance(x, PlanePoint):
        raise DomainError("plane systems act on PlanePoint instances")
    if x.space is not system.space:
        raise DomainError(f"{system.kind.value} acts on {system.space.value} points, "
                          f"got a {x.space.value} point")


def _check_n(system, n):
    if abs(n) > system.max_iterate:
        raise DomainError(f"|n| = {abs(n)} exceeds the configured maximum {system.max_iterate}")


def iterate(system, x, n):
    """``F^n(x)`` for signed ``n``; closed forms for the plane maps."""
    _check_state(system, x)
    n = int(n)
    _check_n(system, n)
    steps = system.sign * n
    if system.metric is Metric.HILBERT_NORM:
        return truncated_apply(system.schedule, system.block_count, x, steps)
    req = IterateRequest(steps, system.precision_digits)
    if system.space is Space.DISK:
        return plane.f_power(x, req)
    return plane.g_power(x, req)


def state_distance(system, a, b):
    if system.metric is Metric.HILBERT_NORM:
        return a.combine(1.0, b, -1.0).norm()
    return plane.distance(a, b)


@dataclass(frozen=True)
class DistanceSeries:
    indices: np.ndarray
    values: np.ndarray
    horizon: int
    log_values: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        if idx.shape != val.shape or idx.ndim != 1:
            raise DomainError("indices and values must be 1-d arrays of equal length")
        if len(idx) and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] > self.horizon):
            raise DomainError("indices must be strictly increasing within [0, horizon]")
        if np.any(~np.isfinite(val)) or np.any(val < 0):
            raise DomainError("distances must be finite and non-negative")

    def __len__(self):
        return len(self.indices)


def sample_indices(horizon, stride=1, extra=None):
    if horizon < 1 or stride < 1:
        raise DomainError("horizon and stride must be positive")
    idx = np.arange(0, horizon + 1, stride, dtype=np.int64)
    if extra is not None and len(extra):
        extra = np.asarray(list(extra), dtype=np.int64)
        if np.any(extra < 0):
            raise DomainError("hint indices must be non-negative")
        idx = np.union1d(idx, extra)
    return idx


def _plane_distances(system, x, y, idx):
    rx, ax = plane.orbit_coordinates(x, idx, system.sign, system.precision_digits)
    ry, ay = plane.orbit_coordinates(y, idx, system.sign, system.precision_digits)
    try:
        zx = plane.coordinates_to_complex(rx, ax, system.space)
        zy = plane.coordinates_to_complex(ry, ay, system.space)
    except NumericalRangeError as exc:
        n = int(idx[exc.index])
        raise NumericalRangeError(f"{system.kind.value}: state overflows at n = {n}", index=n) from None
    d = np.abs(zx - zy)
    if np.any(~np.isfinite(d)):
        n = int(idx[np.argmax(~np.isfinite(d))])
        raise NumericalRangeError(f"{system.kind.value}: distance overflows at n = {n}", index=n)
    return d


def _operator_log_distances(system, x, y, idx):
    # linearity: d(T^n x, T^n y) = ||T^n (x - y)||
    diff = x.combine(1.0, y, -1.0)
    logs = np.empty(len(idx))
    current, at = diff, 0
    for j, n in enumerate(idx):
        current = truncated_apply(system.schedule, system.block_count, current,
                                  system.sign * int(n - at))
        at = int(n)
        logs[j] = current.log_norm()
    return logs


def orbit_distance_series(system, x, y, horizon, stride=1, extra_indices=None):
    """``d(F^n x, F^n y)`` at ``n = 0, stride, 2*stride, ... <= horizon`` plus ``extra_indices``."""
    _check_state(system, x)
    _check_state(system, y)
    idx = sample_indices(horizon, stride, extra_indices)
    _check_n(system, int(idx[-1]))
    top = max(int(horizon), int(idx[-1]))
    if system.metric is Metric.HILBERT_NORM:
        logs = _operator_log_distances(system, x, y, idx)
        if np.any(logs > 709.0):
            n = int(idx[np.argmax(logs > 709.0)])
            raise NumericalRangeError(f"{system.kind.value}: distance overflows at n = {n}", index=n)
        return DistanceSeries(idx, np.exp(logs), top, logs)
    return DistanceSeries(idx, _plane_distances(system, x, y, idx), top)


@dataclass(frozen=True)
class LimitEstimate:
    low: float
    high: float
    low_witnesses: tuple
    high_witnesses: tuple


def estimate_liminf_limsup(series, tail_fraction=0.5, start=None):
    """Min and max of the series over indices ``>= start``.

    ``start`` defaults to ``(1 - tail_fraction) * series.horizon``.  Witnesses
    are the indices attaining the extremes.
    """
    if len(series) == 0:
        raise DomainError("empty distance series")
    if not 0 < tail_fraction <= 1:
        raise DomainError("tail_fraction must lie in (0, 1]")
    if start is None:
        start = (1.0 - tail_fraction) * series.horizon
    mask = series.indices >= start
    if not mask.any():
        mask[-1] = True
    idx, val = series.indices[mask], series.values[mask]
    low, high = float(val.min()), float(val.max())
    return LimitEstimate(low, high,
                         tuple(int(i) for i in idx[val == low]),
                         tuple(int(i) for i in idx[val == high]))


class Verdict(enum.Enum):
    PAIR = "Pair"
    NOT_PAIR = "NotPair"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class LiYorkeVerdict:
    liminf_estimate: float
    limsup_estimate: float
    proximality_witnesses: tuple
    separation_witnesses: tuple
    verdict: Verdict
    thresholds: tuple
    reason: str = ""
    series: DistanceSeries = field(default=None, repr=False, compare=False)


def _log_abs_diff(a, b):
    """``log|e^a - e^b|`` for finite ``a != b``."""
    hi, lo = max(a, b), min(a, b)
    return hi + math.log(-math.expm1(lo - hi))


def _plane_expansion_log_gap(x, y):
    """``log c`` with ``|g^n x - g^n y| >= c e^n`` for all ``n >= 0``, or None if ``x == y``."""
    if x.is_origin and y.is_origin:
        return None
    if x.is_origin or y.is_origin:
        return (y if x.is_origin else x).radial
    if x.radial != y.radial:
        return _log_abs_diff(x.radial, y.radial)
    # equal moduli rotate together, so the gap scales exactly by e^n
    gap = float(plane._dd.circle_distance(x.angle_turns, y.angle_turns))
    if gap == 0:
        return None
    return x.radial + math.log(2 * math.sin(math.pi * gap))


def _exp_or_inf(t):
    return math.inf if t > 709.0 else math.exp(t)


def liyorke_verdict(system, x, y, horizon=10_000, hint_indices=None,
                    delta_low=DELTA_LOW, delta_high=DELTA_HIGH, stride=1, tail_fraction=0.5):
    """Empirical Li-Yorke test for the pair ``{x, y}``.

    * ``Pair`` when the trailing-window minimum is ``<= delta_low`` and the
      maximum ``>= delta_high``.
    * ``NotPair`` when the distance provably diverges (``g``: exact log-domain
      growth), converges to 0 (both orbits contract to the origin, or the
      window is below ``delta_low`` and non-increasing), or increases
      monotonically above ``delta_high``.
    * ``Inconclusive`` otherwise.

    The window is ``n >= (1 - tail_fraction) * horizon``; hints beyond the
    horizon are kept in it.
    """
    if not delta_low < delta_high:
        raise DomainError("delta_low must be smaller than delta_high")
    thresholds = (float(delta_low), float(delta_high))
    start = (1.0 - tail_fraction) * horizon

    if system.kind is SystemKind.PLANE_G:
        _check_state(system, x)
        _check_state(system, y)
        log_c = _plane_expansion_log_gap(x, y)
        if log_c is None:
            return LiYorkeVerdict(0.0, 0.0, (), (), Verdict.NOT_PAIR, thresholds,
                                  "identical orbits: d_n = 0 for all n")
        low = _exp_or_inf(log_c + math.ceil(start))
        return LiYorkeVerdict(low, _exp_or_inf(log_c + horizon), (), (), Verdict.NOT_PAIR,
                              thresholds, f"diverges: log d_n >= n + {log_c:.6g}")

    series = orbit_distance_series(system, x, y, horizon, stride, hint_indices)
    est = estimate_liminf_limsup(series, tail_fraction, start)

    def verdict(v, reason):
        return LiYorkeVerdict(est.low, est.high, est.low_witnesses, est.high_witnesses,
                              v, thresholds, reason, series)

    if est.low <= delta_low and est.high >= delta_high:
        return verdict(Verdict.PAIR, "window reaches both thresholds")

    tail = series.indices >= start
    vals = series.values[tail]
    logs = series.log_values[tail] if series.log_values is not None else np.log(np.maximum(vals, 1e-320))

    if system.kind in (SystemKind.DISK_F_INVERSE, SystemKind.PLANE_G_INVERSE):
        last = int(series.indices[-1])
        mx = iterate(system, x, last)
        my = iterate(system, y, last)
        if mx.modulus + my.modulus <= delta_low:
            return verdict(Verdict.NOT_PAIR,
                           f"converges: both moduli contract to 0, |x_n| + |y_n| = "
                           f"{mx.modulus + my.modulus:.3g} at n = {last}")
    if est.high <= delta_low and np.all(np.diff(vals) <= 0):
        return verdict(Verdict.NOT_PAIR, "converges: window below delta_low and non-increasing")
    if est.low >= delta_high and np.all(np.diff(logs) > 0):
        return verdict(Verdict.NOT_PAIR, "diverges: window above delta_high and increasing")
    return verdict(Verdict.INCONCLUSIVE, "thresholds not met")


@dataclass(frozen=True)
class DistributionEstimate:
    t_grid: np.ndarray
    lower_values: np.ndarray
    upper_values: np.ndarray
    sample_size: int


def distribution_function(series, t_grid):
    """Lower/upper empirical distribution functions of the distance series.

    For each ``t`` the prefix frequency ``(1/n) #{i < n : d_i < t}`` is taken
    for every prefix length ``n`` in the trailing half of the series; the
    minimum and maximum over those ``n`` are returned.
    """
    t = np.asarray(t_grid, dtype=np.float64)
    if t.ndim != 1 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be positive and strictly increasing")
    vals = series.values
    N = len(vals)
    if N == 0:
        raise DomainError("empty distance series")
    first = max(1, math.ceil(N / 2))
    lower = np.empty(len(t))
    upper = np.empty(len(t))
    lengths = np.arange(first, N + 1)
    for j, tj in enumerate(t):
        counts = np.cumsum(vals < tj)[first - 1:]
        freq = counts / lengths
        lower[j], upper[j] = freq.min(), freq.max()
    return DistributionEstimate(t, lower, upper, N)
