"""Scalar probability kernels used throughout the mixture model.

Only the five families the model needs: normal, truncated normal, gamma,
inverse gamma and uniform.  Everything is a pure function of its arguments
plus an explicitly passed ``numpy.random.Generator``, so chains replay
deterministically from a seed and streams can be split across chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, log_ndtr, ndtr, ndtri

from .errors import TruncationUnderflowError

__all__ = [
    "NormalParams",
    "GammaParams",
    "TruncatedNormalParams",
    "normal_cdf",
    "normal_quantile",
    "normal_pdf",
    "log_normal_pdf",
    "sample_truncated_normal",
    "truncated_normal_draws",
    "sample_gamma",
    "sample_inverse_gamma",
    "gamma_draws",
    "inverse_gamma_draws",
    "gamma_pdf",
    "inverse_gamma_pdf",
    "split_generators",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Intervals lying entirely beyond this many standard deviations from the
# mean are sampled by tail-robust exponential rejection instead of
# inverse-cdf, which loses precision out there.
_TAIL_Z = 6.0


@dataclass(frozen=True)
class NormalParams:
    """Mean/variance parameterization of a normal distribution."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (self.variance > 0.0):
            raise ValueError(f"variance must be positive, got {self.variance}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class GammaParams:
    """Shape/rate parameterization shared by the gamma and inverse-gamma
    families."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0.0 and self.rate > 0.0):
            raise ValueError(
                f"shape and rate must be positive, got ({self.shape}, {self.rate})"
            )


@dataclass(frozen=True)
class TruncatedNormalParams:
    """Normal distribution restricted to the interval (lower, upper].

    Bounds may be infinite.  Positivity of the interval probability is
    checked at sampling time, where underflow raises
    :class:`TruncationUnderflowError`.
    """

    base: NormalParams
    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if not (self.lower < self.upper):
            raise ValueError(f"need lower < upper, got ({self.lower}, {self.upper})")


def normal_cdf(x):
    """Standard normal cdf via the error function (ndtr)."""
    return ndtr(x)


def normal_quantile(u):
    """Inverse of :func:`normal_cdf`.  Domain error outside (0, 1)."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("normal_quantile requires u in the open interval (0, 1)")
    return ndtri(u)


def normal_pdf(x, mean=0.0, sd=1.0):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


def log_normal_pdf(x, mean=0.0, sd=1.0):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return -0.5 * z * z - np.log(sd) - _LOG_SQRT_2PI


def _robert_tail_draws(c, d, rng, max_rounds=1000):
    """Draws from a standard normal truncated to [c, d), c >= _TAIL_Z.

    Exponential-proposal rejection sampling; robust arbitrarily far into
    the tail.  ``d`` may be inf.
    """
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    out = np.empty(c.shape, dtype=float)
    pending = np.ones(c.shape, dtype=bool)
    alpha = 0.5 * (c + np.sqrt(c * c + 4.0))
    for _ in range(max_rounds):
        idx = np.nonzero(pending)[0]
        if idx.size == 0:
            return out
        m = idx.size
        y = c[idx] + rng.exponential(size=m) / alpha[idx]
        accept = (y < d[idx]) & (
            np.log(rng.random(m)) <= -0.5 * (y - alpha[idx]) ** 2
        )
        out[idx[accept]] = y[accept]
        pending[idx[accept]] = False
    raise TruncationUnderflowError(
        "tail rejection sampler failed to accept; truncation interval "
        "probability is numerically zero"
    )


def truncated_normal_draws(mean, sd, lower, upper, rng):
    """Vectorized draws from N(mean, sd^2) restricted to (lower, upper].

    Inverse-cdf in the body of the distribution; exponential rejection
    when the interval lies more than ``_TAIL_Z`` standard deviations from
    the mean.  Raises :class:`TruncationUnderflowError` when the interval
    probability underflows.
    """
    mean, sd, lower, upper = np.broadcast_arrays(
        np.asarray(mean, dtype=float),
        np.asarray(sd, dtype=float),
        np.asarray(lower, dtype=float),
        np.asarray(upper, dtype=float),
    )
    if np.any(sd <= 0.0):
        raise ValueError("sd must be positive")
    if np.any(~(lower < upper)):
        raise ValueError("need lower < upper elementwise")

    lo = (lower - mean) / sd
    hi = (upper - mean) / sd

    # Reflect intervals sitting in the upper half into the lower half so a
    # single code path handles both tails.
    flip = lo >= 0.0
    a = np.where(flip, -hi, lo)
    b = np.where(flip, -lo, hi)

    z = np.empty(a.shape, dtype=float)
    tail = b < -_TAIL_Z

    if np.any(~tail):
        ab, bb = a[~tail], b[~tail]
        pa = ndtr(ab)
        pb = ndtr(bb)
        width = pb - pa
        if np.any(width <= 0.0):
            raise TruncationUnderflowError(
                "truncation interval probability underflowed to zero"
            )
        v = rng.random(ab.shape)
        u = pb - width * v  # in (pa, pb]
        u = np.clip(u, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
        x = ndtri(u)
        x = np.minimum(x, bb)
        x = np.where(x <= ab, np.nextafter(ab, bb), x)
        z[~tail] = x

    if np.any(tail):
        # Standardized interval (a, b] entirely below -_TAIL_Z; sample the
        # mirrored upper-tail variable on [-b, -a) and negate.
        z[tail] = -_robert_tail_draws(-b[tail], -a[tail], rng)

    z = np.where(flip, -z, z)
    return mean + sd * z


def sample_truncated_normal(params: TruncatedNormalParams, rng) -> float:
    """Single draw contract wrapper around :func:`truncated_normal_draws`."""
    draw = truncated_normal_draws(
        params.base.mean,
        params.base.sd,
        params.lower,
        params.upper,
        rng,
    )
    return float(draw)


def gamma_draws(shape, rate, rng, size=None):
    """Gamma(shape, rate) draws; mean shape/rate."""
    shape = np.asarray(shape, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if np.any(shape <= 0.0) or np.any(rate <= 0.0):
        raise ValueError("gamma shape and rate must be positive")
    return rng.gamma(shape, 1.0 / rate, size=size)


def inverse_gamma_draws(shape, rate, rng, size=None):
    """Inverse-gamma(shape, rate) draws; mean rate/(shape-1) for shape>1."""
    return 1.0 / gamma_draws(shape, rate, rng, size=size)


def sample_gamma(params: GammaParams, rng, size=None):
    return gamma_draws(params.shape, params.rate, rng, size=size)


def sample_inverse_gamma(params: GammaParams, rng, size=None):
    return inverse_gamma_draws(params.shape, params.rate, rng, size=size)


def gamma_pdf(x, params: GammaParams):
    """Density of Gamma(shape, rate) at x (0 outside the support)."""
    a, b = params.shape, params.rate
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=float)
    pos = x > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x, where=pos, out=np.full(x.shape, -np.inf))
        out = np.where(
            pos,
            np.exp(a * math.log(b) + (a - 1.0) * lx - b * x - gammaln(a)),
            0.0,
        )
    if a == 1.0:
        out = np.where(x == 0.0, b, out)
    elif a < 1.0:
        out = np.where(x == 0.0, np.inf, out)
    return out if out.shape else float(out)


def inverse_gamma_pdf(x, params: GammaParams):
    """Density of InvGamma(shape, rate) at x (0 outside the support)."""
    a, b = params.shape, params.rate
    x = np.asarray(x, dtype=float)
    pos = x > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x, where=pos, out=np.full(x.shape, np.inf))
        out = np.where(
            pos,
            np.exp(a * math.log(b) - (a + 1.0) * lx - b / np.where(pos, x, 1.0) - gammaln(a)),
            0.0,
        )
    return out if out.shape else float(out)


def split_generators(seed, n):
    """n independent generators spawned from one seed, one per chain."""
    seq = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in seq.spawn(n)]
