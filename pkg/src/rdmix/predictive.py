"""Rao-Blackwellized posterior predictive functionals.

Every summary here is the arithmetic mean over retained draws of the
exact per-draw mixture functional; outcomes are never resampled.  Grid
and draw dimensions are chunked so 40K-draw chains evaluate in bounded
memory, and averaging relies on numpy's pairwise summation for
associativity-safe accumulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import InsufficientDrawsError, RdmixError
from .model import (
    LINK_EXPONENT_LIMIT,
    component_log_weights,
)
from .sampler import PosteriorDraws

__all__ = [
    "PredictiveQuery",
    "PredictiveSummary",
    "MIN_BAND_DRAWS",
    "per_draw_weights",
    "per_draw_moments",
    "per_draw_cdf_at",
    "per_draw_pdf_at",
    "per_draw_fourth_central",
    "per_draw_success_prob",
    "per_draw_quantiles",
    "predictive_moments",
    "predictive_moments_at",
    "averaged_cdf",
    "predict",
    "predictive_quantile",
    "cdf_credible_band",
    "pp_plot_data",
]

MIN_BAND_DRAWS = 40
_GRID_CHUNK = 32
_SD_FLOOR = 1e-150


@dataclass(frozen=True)
class PredictiveQuery:
    """Evaluation locus: covariates (r, t) and an outcome grid."""

    r: float
    t: int
    grid: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        object.__setattr__(self, "grid", grid)
        if grid.ndim != 1 or grid.size < 16:
            raise ValueError("grid needs at least 16 points")
        if not np.all(np.diff(grid) > 0.0):
            raise ValueError("grid must be strictly increasing")
        if self.t not in (0, 1):
            raise ValueError("t must be 0 or 1")

    @staticmethod
    def default_grid(y: np.ndarray, points: int = 512) -> np.ndarray:
        """512 points spanning the data range with 3-sd margins."""
        y = np.asarray(y, dtype=float)
        sd = float(np.std(y, ddof=1)) if y.size > 1 else 1.0
        sd = max(sd, 1e-12)
        return np.linspace(y.min() - 3.0 * sd, y.max() + 3.0 * sd, points)

    @classmethod
    def for_data(cls, r: float, t: int, y: np.ndarray, points: int = 512) -> "PredictiveQuery":
        return cls(r, t, cls.default_grid(y, points))


@dataclass(frozen=True)
class PredictiveSummary:
    """Gridded density/cdf estimates plus scalar summaries at one query."""

    query: PredictiveQuery
    density: np.ndarray
    cdf: np.ndarray
    mean: float
    variance: float
    quantiles: Dict[float, float]
    cdf_band_lower: Optional[np.ndarray]
    cdf_band_upper: Optional[np.ndarray]


def _require_nonempty(draws: PosteriorDraws):
    if len(draws) == 0:
        raise RdmixError("posterior draw set is empty")


def _links_at(draws: PosteriorDraws, r: float, t: float):
    x = np.array([1.0, float(r), float(t)])
    eta = draws.beta @ x
    expo = np.clip(draws.lam @ x, -LINK_EXPONENT_LIMIT, LINK_EXPONENT_LIMIT)
    return eta, np.exp(0.5 * expo)


def per_draw_weights(draws: PosteriorDraws, r: float, t: float) -> np.ndarray:
    """(D, C) component weights at (r, t), masked to each draw's window
    and renormalized within it."""
    _require_nonempty(draws)
    eta, sig = _links_at(draws, r, t)
    logw = component_log_weights(
        draws.j_index[None, :], eta[:, None], sig[:, None]
    )
    w = np.exp(logw)
    w[~draws.mask] = 0.0
    total = w.sum(axis=1)
    if np.any(total <= 0.0):
        raise RdmixError("query point carries no weight inside the stored windows")
    return w / total[:, None]


def per_draw_moments(draws: PosteriorDraws, r: float, t: float, w: Optional[np.ndarray] = None):
    """Per-draw conditional mean and variance (closed forms)."""
    if w is None:
        w = per_draw_weights(draws, r, t)
    mu = np.where(draws.mask, draws.mu, 0.0)
    s2 = np.where(draws.mask, draws.sigma_sq, 0.0)
    mean = np.sum(w * mu, axis=1)
    second = np.sum(w * (s2 + mu * mu), axis=1)
    var = np.maximum(second - mean * mean, 0.0)
    return mean, var


def per_draw_fourth_central(draws: PosteriorDraws, r: float, t: float, w: Optional[np.ndarray] = None):
    """Per-draw fourth central moment about the per-draw mean."""
    if w is None:
        w = per_draw_weights(draws, r, t)
    mu = np.where(draws.mask, draws.mu, 0.0)
    s2 = np.where(draws.mask, draws.sigma_sq, 0.0)
    mean = np.sum(w * mu, axis=1)
    d = mu - mean[:, None]
    return np.sum(w * (3.0 * s2 * s2 + 6.0 * s2 * d * d + d**4), axis=1)


def per_draw_cdf_at(draws: PosteriorDraws, w: np.ndarray, y) -> np.ndarray:
    """Per-draw mixture cdf.  Scalar y -> (D,); vector y -> (D, G)."""
    sd = np.sqrt(np.where(draws.mask, draws.sigma_sq, 1.0))
    sd = np.maximum(sd, _SD_FLOOR)
    mu = np.where(draws.mask, draws.mu, 0.0)
    y_arr = np.asarray(y, dtype=float)
    if y_arr.ndim == 0:
        z = (y_arr - mu) / sd
        return np.sum(w * ndtr(z), axis=1)
    out = np.empty((w.shape[0], y_arr.size))
    for start in range(0, y_arr.size, _GRID_CHUNK):
        chunk = y_arr[start : start + _GRID_CHUNK]
        z = (chunk[None, None, :] - mu[:, :, None]) / sd[:, :, None]
        out[:, start : start + chunk.size] = np.einsum("dc,dcg->dg", w, ndtr(z))
    return out


def per_draw_pdf_at(draws: PosteriorDraws, w: np.ndarray, y) -> np.ndarray:
    """Per-draw mixture density.  Scalar y -> (D,); vector y -> (D, G)."""
    sd = np.sqrt(np.where(draws.mask, draws.sigma_sq, 1.0))
    sd = np.maximum(sd, _SD_FLOOR)
    mu = np.where(draws.mask, draws.mu, 0.0)
    norm = 1.0 / (sd * math.sqrt(2.0 * math.pi))
    y_arr = np.asarray(y, dtype=float)
    if y_arr.ndim == 0:
        z = (y_arr - mu) / sd
        return np.sum(w * norm * np.exp(-0.5 * z * z), axis=1)
    out = np.empty((w.shape[0], y_arr.size))
    for start in range(0, y_arr.size, _GRID_CHUNK):
        chunk = y_arr[start : start + _GRID_CHUNK]
        z = (chunk[None, None, :] - mu[:, :, None]) / sd[:, :, None]
        kern = np.exp(-0.5 * z * z) * norm[:, :, None]
        out[:, start : start + chunk.size] = np.einsum("dc,dcg->dg", w, kern)
    return out


def per_draw_success_prob(draws: PosteriorDraws, r: float, a: int) -> np.ndarray:
    """Per-draw P(outcome = 1 | r, a) for binary-model draws: the
    weight-averaged upper-orthant mass of each component."""
    if draws.kind != "binary":
        raise RdmixError("success probabilities need binary-model draws")
    w = per_draw_weights(draws, r, a)
    sd = np.sqrt(np.where(draws.mask, draws.sigma_sq, 1.0))
    mu = np.where(draws.mask, draws.mu, 0.0)
    return np.sum(w * ndtr(mu / np.maximum(sd, _SD_FLOOR)), axis=1)


def predictive_moments(draws: PosteriorDraws, r: float, t: float):
    """Posterior predictive mean and variance of the outcome at (r, t).

    The variance is the posterior expectation of squared deviation about
    the predictive mean: mean per-draw variance plus the variance of the
    per-draw means.
    """
    m, v = per_draw_moments(draws, r, t)
    e_n = float(np.mean(m))
    v_n = float(np.mean(v) + np.mean(m * m) - e_n * e_n)
    return e_n, max(v_n, 0.0)


def predictive_moments_at(draws: PosteriorDraws, r_values, t_values, obs_chunk: int = 16):
    """Vectorized :func:`predictive_moments` over many (r, t) points."""
    _require_nonempty(draws)
    r_values = np.asarray(r_values, dtype=float)
    t_values = np.asarray(t_values, dtype=float)
    m_out = np.empty(r_values.size)
    v_out = np.empty(r_values.size)
    mu = np.where(draws.mask, draws.mu, 0.0)
    s2 = np.where(draws.mask, draws.sigma_sq, 0.0)
    j_row = draws.j_index[None, None, :]
    for start in range(0, r_values.size, obs_chunk):
        sl = slice(start, min(start + obs_chunk, r_values.size))
        x = np.stack(
            [np.ones(sl.stop - sl.start), r_values[sl], t_values[sl]], axis=0
        )
        eta = draws.beta @ x  # (D, m)
        expo = np.clip(draws.lam @ x, -LINK_EXPONENT_LIMIT, LINK_EXPONENT_LIMIT)
        sig = np.exp(0.5 * expo)
        w = np.exp(component_log_weights(j_row, eta[:, :, None], sig[:, :, None]))
        w *= draws.mask[:, None, :]
        w /= w.sum(axis=2, keepdims=True)
        mean = np.einsum("dmc,dc->dm", w, mu)
        second = np.einsum("dmc,dc->dm", w, s2 + mu * mu)
        var = np.maximum(second - mean * mean, 0.0)
        e_n = mean.mean(axis=0)
        m_out[sl] = e_n
        v_out[sl] = np.maximum(var.mean(axis=0) + (mean * mean).mean(axis=0) - e_n * e_n, 0.0)
    return m_out, v_out


def averaged_cdf(draws: PosteriorDraws, w: np.ndarray, y: float) -> float:
    """Rao-Blackwell averaged predictive cdf at a scalar point."""
    return float(np.mean(per_draw_cdf_at(draws, w, float(y))))


def predictive_quantile(draws: PosteriorDraws, r: float, t: float, u: float, tol: float = 1e-8) -> float:
    """Invert the averaged predictive cdf by bracketed bisection."""
    if not (0.0 < u < 1.0):
        raise ValueError("quantile level must lie in (0, 1)")
    w = per_draw_weights(draws, r, t)
    return _invert_averaged_cdf(draws, w, u, tol)


def _invert_averaged_cdf(draws, w, u, tol=1e-8):
    m, v = per_draw_moments(draws, 0.0, 0.0, w=w)
    center = float(np.mean(m))
    spread = math.sqrt(max(float(np.mean(v) + np.var(m)), 1e-30))
    lo = center - 8.0 * spread
    hi = center + 8.0 * spread
    span = hi - lo
    for _ in range(400):
        if averaged_cdf(draws, w, lo) < u:
            break
        lo -= span
        span *= 2.0
        if not math.isfinite(lo):
            raise RdmixError("quantile bracket expansion overflowed (lower)")
    span = hi - lo
    for _ in range(400):
        if averaged_cdf(draws, w, hi) > u:
            break
        hi += span
        span *= 2.0
        if not math.isfinite(hi):
            raise RdmixError("quantile bracket expansion overflowed (upper)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = averaged_cdf(draws, w, mid)
        if abs(fm - u) <= tol and (hi - lo) <= 1e-9 * max(1.0, abs(mid)):
            return mid
        if fm < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def per_draw_quantiles(draws: PosteriorDraws, r: float, t: float, u: float) -> np.ndarray:
    """Per-draw mixture quantiles (vectorized bisection across draws)."""
    if not (0.0 < u < 1.0):
        raise ValueError("quantile level must lie in (0, 1)")
    w = per_draw_weights(draws, r, t)
    m, v = per_draw_moments(draws, r, t, w=w)
    sd = np.sqrt(np.maximum(v, 1e-30))
    lo = m - 8.0 * sd
    hi = m + 8.0 * sd
    span = hi - lo
    for _ in range(200):
        f_lo = _cdf_at_per_draw_points(draws, w, lo)
        bad = f_lo >= u
        if not np.any(bad):
            break
        lo = np.where(bad, lo - span, lo)
        span = np.where(bad, span * 2.0, span)
    span = hi - lo
    for _ in range(200):
        f_hi = _cdf_at_per_draw_points(draws, w, hi)
        bad = f_hi <= u
        if not np.any(bad):
            break
        hi = np.where(bad, hi + span, hi)
        span = np.where(bad, span * 2.0, span)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        fm = _cdf_at_per_draw_points(draws, w, mid)
        below = fm < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _cdf_at_per_draw_points(draws: PosteriorDraws, w: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-draw cdf where each draw gets its own evaluation point."""
    sd = np.sqrt(np.where(draws.mask, draws.sigma_sq, 1.0))
    sd = np.maximum(sd, _SD_FLOOR)
    mu = np.where(draws.mask, draws.mu, 0.0)
    z = (np.asarray(y, dtype=float)[:, None] - mu) / sd
    return np.sum(w * ndtr(z), axis=1)


def predict(
    draws: PosteriorDraws,
    query: PredictiveQuery,
    quantiles: Sequence[float] = (0.025, 0.25, 0.5, 0.75, 0.975),
) -> PredictiveSummary:
    """Full predictive summary at one (r, t) query.

    Density, cdf, mean, variance and quantiles are Rao-Blackwell averages
    of exact per-draw mixture functionals.  Credible bands on the cdf are
    pointwise empirical 2.5/97.5 percentiles across draws and require at
    least MIN_BAND_DRAWS draws (omitted otherwise).
    """
    _require_nonempty(draws)
    w = per_draw_weights(draws, query.r, query.t)
    mean, variance = predictive_moments(draws, query.r, query.t)
    density = per_draw_pdf_at(draws, w, query.grid).mean(axis=0)
    cdf_matrix = per_draw_cdf_at(draws, w, query.grid)
    cdf = cdf_matrix.mean(axis=0)
    if len(draws) >= MIN_BAND_DRAWS:
        lower, upper = np.percentile(cdf_matrix, [2.5, 97.5], axis=0)
    else:
        lower = upper = None
    qvals = {float(u): _invert_averaged_cdf(draws, w, float(u)) for u in quantiles}
    return PredictiveSummary(
        query=query,
        density=density,
        cdf=cdf,
        mean=mean,
        variance=variance,
        quantiles=qvals,
        cdf_band_lower=lower,
        cdf_band_upper=upper,
    )


def cdf_credible_band(draws: PosteriorDraws, r: float, t: float, grid):
    """Pointwise 95% band of the conditional cdf across draws."""
    _require_nonempty(draws)
    if len(draws) < MIN_BAND_DRAWS:
        raise InsufficientDrawsError(
            f"credible bands need at least {MIN_BAND_DRAWS} draws, got {len(draws)}"
        )
    grid = np.asarray(grid, dtype=float)
    w = per_draw_weights(draws, r, t)
    cdf_matrix = per_draw_cdf_at(draws, w, grid)
    lower, upper = np.percentile(cdf_matrix, [2.5, 97.5], axis=0)
    return lower, upper


def pp_plot_data(draws: PosteriorDraws, r0: float, grid) -> Dict[str, np.ndarray]:
    """Paired-cdf table at the cutoff used to judge quantile effects.

    Columns: grid point, averaged cdf and 95% band for t=0 and t=1, and a
    per-row flag telling whether the two bands overlap.
    """
    grid = np.asarray(grid, dtype=float)
    out: Dict[str, np.ndarray] = {"y": grid}
    cdfs = {}
    bands = {}
    for t in (0, 1):
        if len(draws) < MIN_BAND_DRAWS:
            raise InsufficientDrawsError(
                f"P-P bands need at least {MIN_BAND_DRAWS} draws, got {len(draws)}"
            )
        w = per_draw_weights(draws, r0, t)
        cdf_matrix = per_draw_cdf_at(draws, w, grid)
        cdfs[t] = cdf_matrix.mean(axis=0)
        bands[t] = np.percentile(cdf_matrix, [2.5, 97.5], axis=0)
    out["cdf_t0"] = cdfs[0]
    out["cdf_t1"] = cdfs[1]
    out["lower_t0"], out["upper_t0"] = bands[0]
    out["lower_t1"], out["upper_t1"] = bands[1]
    out["bands_overlap"] = ~(
        (bands[0][1] < bands[1][0]) | (bands[1][1] < bands[0][0])
    )
    return out
