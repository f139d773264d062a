"""Block-diagonal operator ``T = T_1 (+) T_2 (+) ...`` and its inverse.

Block ``T_i`` is the ``n_i x n_i`` upper-bidiagonal matrix with ``1 - eps_i``
on the diagonal and ``2 eps_i`` on the superdiagonal.  Its inverse is the
upper-triangular Toeplitz matrix with entries
``(1/(1-eps_i)) * (-2 eps_i / (1 - eps_i))**(k - j)``.

Vectors are processed in reversed coordinate order, where ``T_i`` becomes a
causal two-tap FIR filter and ``T_i^{-1}`` a one-pole IIR filter, so powers
run through :func:`scipy.signal.lfilter`.  Powers are applied in chunks
(``T^k`` as one filter) and renormalised after every chunk; the scale is kept
as a separate logarithm because ``||T_i^{-n}||`` grows like
``(1 - eps_i)^{-n}``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import mpmath
import numpy as np
from scipy.signal import fftconvolve, lfilter
from scipy.special import gammaln, logsumexp

from liyorke.errors import DomainError, NumericalRangeError

MAX_POWER = 10**7
# forward powers go through closed-form taps, whose cost does not grow with n
MAX_FORWARD_POWER = 2**52
MAX_CHUNK = 32


@dataclass(frozen=True)
class BlockParams:
    i: int
    eps_i: float
    L_i: int
    m_i: int
    n_i: int


@dataclass(frozen=True)
class ParameterSchedule:
    eps: float
    C: tuple
    blocks: tuple

    def block(self, i):
        """Block matrix for the 1-based block index ``i``."""
        p = self.blocks[i - 1]
        return BlockMatrix(p.i, p.n_i, p.eps_i)

    def block_matrices(self, K=None):
        K = len(self.blocks) if K is None else K
        return [self.block(i) for i in range(1, K + 1)]

    def dims(self, K=None):
        K = len(self.blocks) if K is None else K
        return tuple(p.n_i for p in self.blocks[:K])


def _power_reaches(base, L, target):
    with mpmath.workdps(50):
        return mpmath.power(mpmath.mpf(base), L) >= target


def minimal_exponent(eps_i, C_i):
    """Least ``L >= 1`` with ``(1 + eps_i)**L >= sqrt(2) * C_i``."""
    with mpmath.workdps(50):
        target = mpmath.sqrt(2) * mpmath.mpf(C_i)
        base = 1 + mpmath.mpf(eps_i)
    L = max(1, math.ceil(math.log(math.sqrt(2) * C_i) / math.log1p(eps_i)))
    while L > 1 and _power_reaches(base, L - 1, target):
        L -= 1
    while not _power_reaches(base, L, target):
        L += 1
    return L


def build_schedule(eps, C, K=None):
    """Block parameters ``eps_i = 4^{-i} eps``, minimal ``L_i``,
    ``m_i = i L_i + 1`` and ``n_i = 2 m_i`` for ``i = 1..K``."""
    C = tuple(float(c) for c in C)
    K = len(C) if K is None else int(K)
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    if K < 1 or len(C) < K:
        raise DomainError(f"need 1 <= K <= len(C), got K={K}, len(C)={len(C)}")
    if any(c <= 0 for c in C) or any(b <= a for a, b in zip(C, C[1:])):
        raise DomainError("C must be positive and strictly increasing")
    blocks = []
    for i in range(1, K + 1):
        eps_i = eps / 4**i
        L = minimal_exponent(eps_i, C[i - 1])
        m = i * L + 1
        blocks.append(BlockParams(i, eps_i, L, m, 2 * m))
    return ParameterSchedule(float(eps), C, tuple(blocks))


@dataclass(frozen=True)
class BlockMatrix:
    i: int
    dim: int
    eps_i: float

    @property
    def diag(self):
        return 1.0 - self.eps_i

    @property
    def sup(self):
        return 2.0 * self.eps_i

    @property
    def ratio(self):
        """``sup / diag``; the inverse entries are ``(-ratio)**(k-j) / diag``."""
        return self.sup / self.diag

    def dense(self):
        return np.diag(np.full(self.dim, self.diag)) + np.diag(np.full(self.dim - 1, self.sup), 1)

    def inverse_dense(self):
        """Closed-form ``T_i^{-1}``; O(dim^2) memory, meant for small blocks."""
        k = np.arange(self.dim)
        gap = k[None, :] - k[:, None]
        with np.errstate(under="ignore"):
            powers = (-self.ratio) ** np.maximum(gap, 0).astype(float)
        return np.where(gap >= 0, powers / self.diag, 0.0)

    def chunk(self):
        return max(1, min(MAX_CHUNK, int(0.5 / self.ratio)))


def _check_dim(b, v):
    v = np.asarray(v)
    if v.shape[-1] != b.dim:
        raise DomainError(f"block {b.i} has dimension {b.dim}, got a vector of length {v.shape[-1]}")
    return v


def _forward_taps(b, k, unit=False):
    """Coefficients of ``T_i^k`` along the reversed axis; ``unit`` drops the
    scalar factor ``diag**k``."""
    j = np.arange(k + 1)
    gain = 0.0 if unit else k * math.log1p(-b.eps_i)
    return np.exp(gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1)
                  + gain + j * math.log(b.ratio))


def _inverse_poles(b, k):
    j = np.arange(k + 1)
    return np.exp(gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1) + j * math.log(b.ratio))


def _apply_reversed(b, y, k, inverse, unit=False):
    if inverse:
        return lfilter([1.0 if unit else b.diag ** (-k)], _inverse_poles(b, k), y, axis=-1)
    return lfilter(_forward_taps(b, k, unit), [1.0], y, axis=-1)


def block_apply(b, v, direction="forward", method="backsub"):
    """``T_i v`` or ``T_i^{-1} v`` (batched over leading axes).

    For the inverse, ``method="backsub"`` solves ``T x = v`` by back
    substitution in O(dim); ``"closed_form"`` accumulates the explicit
    inverse entries in O(dim^2).
    """
    v = _check_dim(b, v)
    if direction == "forward":
        out = b.diag * v.astype(np.result_type(v, float))
        out[..., :-1] += b.sup * v[..., 1:]
        return out
    if direction != "inverse":
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    if method == "backsub":
        return _apply_reversed(b, v[..., ::-1], 1, True)[..., ::-1]
    if method == "closed_form":
        with np.errstate(under="ignore"):
            row = (-b.ratio) ** np.arange(b.dim, dtype=float) / b.diag
        # entries past the float underflow are exact zeros and add nothing
        row = row[: np.count_nonzero(row)]
        return lfilter(row, [1.0], v[..., ::-1], axis=-1)[..., ::-1]
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ScaledVector:
    """The vector ``exp(log_scale) * direction``."""

    direction: np.ndarray
    log_scale: float = 0.0

    def log_norm(self):
        nrm = np.linalg.norm(self.direction)
        return -math.inf if nrm == 0 else self.log_scale + math.log(nrm)

    def norm(self):
        ln = self.log_norm()
        if ln > 709.0:
            raise NumericalRangeError(f"norm exp({ln:.6g}) overflows")
        return math.exp(ln)

    def to_array(self):
        if self.log_scale > 709.0:
            raise NumericalRangeError(f"scale exp({self.log_scale:.6g}) overflows")
        return self.direction * math.exp(self.log_scale)


def _log_diag(b):
    return math.log1p(-b.eps_i)


def forward_power_kernel(b, n, length):
    """Taps ``c_k / c_max`` of the unit power ``(I + ratio S)^n`` for
    ``k < length`` and ``log c_max``, where ``c_k = C(n, k) ratio^k``.

    The taps follow the recurrence ``c_{k+1} = c_k ratio (n - k) / (k + 1)``
    in blocks of 16 with a separate log carry, so neither overflow nor the
    cancellation of ``gammaln`` differences enters.
    """
    K = int(min(length, n + 1))
    k = np.arange(K - 1, dtype=np.float64)
    steps = b.ratio * (n - k) / (k + 1)
    segments = [(0, np.ones(1), 0.0)]
    carry, carry_log = 1.0, 0.0
    for start in range(0, K - 1, 16):
        seg = np.cumprod(steps[start:start + 16]) * carry
        segments.append((start + 1, seg, carry_log))
        mant, exp = math.frexp(seg[-1])
        carry, carry_log = mant, carry_log + exp * math.log(2.0)
    log_max = max(lg + math.log(np.max(sg)) for _, sg, lg in segments)
    taps = np.empty(K)
    with np.errstate(under="ignore"):
        for pos, sg, lg in segments:
            taps[pos:pos + sg.size] = sg * math.exp(lg - log_max)
    taps = taps[: np.flatnonzero(taps)[-1] + 1]
    return taps, log_max


def _forward_power(b, v, n):
    y = v[..., ::-1]
    nz = np.flatnonzero(np.any(y != 0, axis=tuple(range(y.ndim - 1))))
    if nz.size == 0:
        return ScaledVector(np.zeros_like(v), 0.0)
    # output i only sees taps k <= i - first nonzero index of y
    taps, log_max = forward_power_kernel(b, n, b.dim - nz[0])
    if taps.size * b.dim <= 2**26:
        out = lfilter(taps, [1.0], y, axis=-1)
    else:
        shape = (1,) * (y.ndim - 1) + (-1,)
        out = fftconvolve(y, taps.reshape(shape), axes=-1)[..., : b.dim]
    s = np.max(np.abs(out))
    log_scale = n * _log_diag(b) + log_max
    if s == 0:
        return ScaledVector(np.zeros_like(v), 0.0)
    return ScaledVector((out / s)[..., ::-1].copy(), log_scale + math.log(s))


def block_power_apply(b, v, n, method="auto"):
    """``T_i^n v`` for signed ``n`` as a :class:`ScaledVector`.

    Forward powers use the closed-form Toeplitz taps of ``T_i^n``
    (``method="toeplitz"``); repeated filtering would carry rounding noise of
    order ``1e-16`` times the transient peak into the decayed tail.  Inverse
    powers, and ``method="step"``, apply chunked filters and renormalise after
    every chunk.
    """
    v = _check_dim(b, v).astype(float)
    n = int(n)
    if method not in ("auto", "step", "toeplitz"):
        raise ValueError(f"unknown method {method!r}")
    if 0 < n <= MAX_FORWARD_POWER and method != "step":
        return _forward_power(b, v, n)
    if abs(n) > MAX_POWER:
        raise NumericalRangeError(f"|n| = {abs(n)} exceeds the power limit {MAX_POWER}")
    if n < 0 and method == "toeplitz":
        raise ValueError("the Toeplitz path covers forward powers only")
    y = v[..., ::-1].copy()
    # T^n = diag^n (I + ratio S)^n; the scalar part goes straight into the log
    log_scale = n * _log_diag(b)
    remaining = abs(n)
    step = b.chunk()
    while remaining:
        k = min(step, remaining)
        y = _apply_reversed(b, y, k, n < 0, unit=True)
        remaining -= k
        s = np.max(np.abs(y))
        if s == 0:
            break
        y /= s
        log_scale += math.log(s)
    return ScaledVector(y[..., ::-1].copy(), log_scale)


def power_log_norm_bound(b, n):
    """Upper bound for ``log ||T_i^n||_2``: the log of the summed absolute
    Toeplitz coefficients, which bounds both the 1- and the inf-norm."""
    n = float(n)
    if n == 0:
        return 0.0
    m = abs(n)
    if n > 0:
        k = np.arange(int(min(m, b.dim - 1)) + 1)
        log_binom = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
    else:
        k = np.arange(b.dim)
        log_binom = gammaln(m + k) - gammaln(k + 1) - gammaln(m)
    return float(n * math.log(b.diag) + logsumexp(log_binom + k * math.log(b.ratio)))


def forward_decay_horizon(b, tol=1e-8, n_limit=2**62):
    """First ``n = 2^j`` at which the bound on ``||T_i^n||`` drops to ``tol``."""
    n = 1
    log_tol = math.log(tol)
    while power_log_norm_bound(b, n) > log_tol:
        n *= 2
        if n > n_limit:
            raise NumericalRangeError(f"block {b.i} does not decay below {tol} before n = {n_limit}")
    return n


@dataclass(frozen=True)
class GrowthProfile:
    log_norms: np.ndarray
    argmax: int
    log_max: float

    @property
    def norms(self):
        return np.exp(self.log_norms)


def probe_vector(b, probe):
    v = np.zeros(b.dim)
    if probe in ("first", "first_basis_vector"):
        v[0] = 1.0
    elif probe in ("last", "last_basis_vector"):
        v[-1] = 1.0
    elif probe in ("uniform", "uniform_vector"):
        v[:] = 1.0 / math.sqrt(b.dim)
    else:
        raise DomainError(f"unknown probe {probe!r}")
    return v


def transient_growth_profile(b, probe="uniform", n_max=100):
    """``log ||T_i^n u||`` for ``n = 0..n_max`` and the position of the peak."""
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    u = probe_vector(b, probe) if isinstance(probe, str) else _check_dim(b, probe).astype(float)
    y = u[::-1].copy()
    log_scale = 0.0
    out = np.empty(n_max + 1)
    out[0] = math.log(np.linalg.norm(y))
    taps = _forward_taps(b, 1)
    for n in range(1, n_max + 1):
        y = lfilter(taps, [1.0], y)
        s = np.linalg.norm(y)
        if s == 0:
            out[n:] = -math.inf
            break
        y /= s
        log_scale += math.log(s)
        out[n] = log_scale
    k = int(np.argmax(out))
    return GrowthProfile(out, k, float(out[k]))


@dataclass(frozen=True)
class TruncatedVector:
    """A vector of ``H_1 (+) ... (+) H_K``; block ``i`` is ``exp(log_scales[i]) * blocks[i]``."""

    blocks: tuple
    log_scales: tuple = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(np.asarray(b) for b in self.blocks))
        if self.log_scales is None:
            object.__setattr__(self, "log_scales", (0.0,) * len(self.blocks))

    @classmethod
    def zeros(cls, schedule, K=None):
        return cls(tuple(np.zeros(d) for d in schedule.dims(K)))

    @classmethod
    def random(cls, schedule, rng, K=None):
        return cls(tuple(rng.standard_normal(d) for d in schedule.dims(K)))

    @classmethod
    def basis(cls, schedule, block, j=0, K=None):
        x = cls.zeros(schedule, K)
        x.blocks[block - 1][j] = 1.0
        return x

    def log_norm(self):
        logs = [ls + math.log(n) for ls, n in
                zip(self.log_scales, (np.linalg.norm(b) for b in self.blocks)) if n > 0]
        return 0.5 * float(logsumexp(2 * np.array(logs))) if logs else -math.inf

    def norm(self):
        ln = self.log_norm()
        if ln > 709.0:
            raise NumericalRangeError(f"norm exp({ln:.6g}) overflows")
        return math.exp(ln)

    def to_arrays(self):
        return tuple(ScaledVector(b, s).to_array() for b, s in zip(self.blocks, self.log_scales))

    def combine(self, alpha, other, beta):
        """``alpha * self + beta * other`` (materialises both)."""
        return TruncatedVector(tuple(alpha * a + beta * b
                                     for a, b in zip(self.to_arrays(), other.to_arrays())))


def truncated_apply(schedule, K, x, n, max_workers=None):
    """``T^n x`` on the first ``K`` blocks, block by block."""
    dims = schedule.dims(K)
    if len(x.blocks) != K or tuple(b.shape[-1] for b in x.blocks) != dims:
        raise DomainError(f"vector blocks {[b.shape[-1] for b in x.blocks]} do not match {list(dims)}")
    mats = schedule.block_matrices(K)

    def one(idx):
        r = block_power_apply(mats[idx], x.blocks[idx], n)
        return r.direction, r.log_scale + x.log_scales[idx]

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            results = list(pool.map(one, range(K)))
    else:
        results = [one(idx) for idx in range(K)]
    return TruncatedVector(tuple(r[0] for r in results), tuple(r[1] for r in results))
