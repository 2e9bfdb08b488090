"""Model-fit and chain-convergence diagnostics.

Standardized residuals divide each observation's deviation from its
predictive mean by the predictive standard deviation; |residual| > 2
flags an outlier.  R-squared is the standard predictive coefficient of
determination, 1 - SS_res / SS_tot (one convention among several; noted
here because comparisons against other software may use another).
Batch-means half-widths estimate Monte-Carlo error from the spread of
per-batch averages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .errors import ShortSeriesError
from .model import Dataset
from .predictive import predictive_moments_at
from .sampler import PosteriorDraws

__all__ = [
    "FitReport",
    "ConvergenceReport",
    "residuals",
    "r_squared",
    "batch_means_ci",
    "traces",
    "convergence_report",
]

OUTLIER_THRESHOLD = 2.0
DEFAULT_BATCHES = 40
DEFAULT_HALF_WIDTH_TARGET = 0.01


@dataclass(frozen=True)
class FitReport:
    """Per-observation standardized residuals plus fit summaries."""

    residual: np.ndarray
    outlier: np.ndarray
    degenerate: np.ndarray
    r_squared: float
    n_outliers: int

    def to_dict(self) -> dict:
        return {
            "r_squared": self.r_squared,
            "n_outliers": self.n_outliers,
            "n_degenerate": int(self.degenerate.sum()),
            "n_observations": int(self.residual.size),
            "residual_min": float(np.nanmin(self.residual)),
            "residual_max": float(np.nanmax(self.residual)),
        }


@dataclass(frozen=True)
class ConvergenceReport:
    """Batch-means 95% Monte-Carlo half-widths per scalar trace."""

    means: Dict[str, float]
    half_widths: Dict[str, float]
    threshold: float

    @property
    def within_target(self) -> Dict[str, bool]:
        return {k: hw <= self.threshold for k, hw in self.half_widths.items()}

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "means": self.means,
            "half_widths": self.half_widths,
            "within_target": self.within_target,
        }


def residuals(draws: PosteriorDraws, data: Dataset) -> FitReport:
    """Standardized residual for every observation, with outlier flags.

    Observations whose predictive variance is numerically zero are marked
    degenerate (NaN residual, never flagged as outliers).
    """
    e_n, v_n = predictive_moments_at(draws, data.r, data.t.astype(float))
    degenerate = v_n <= 0.0
    resid = np.full(data.n, np.nan)
    ok = ~degenerate
    resid[ok] = (data.y[ok] - e_n[ok]) / np.sqrt(v_n[ok])
    outlier = np.zeros(data.n, dtype=bool)
    outlier[ok] = np.abs(resid[ok]) > OUTLIER_THRESHOLD
    return FitReport(
        residual=resid,
        outlier=outlier,
        degenerate=degenerate,
        r_squared=_r_squared_from_means(data.y, e_n),
        n_outliers=int(outlier.sum()),
    )


def _r_squared_from_means(y: np.ndarray, e_n: np.ndarray) -> float:
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return float("nan")
    ss_res = float(np.sum((y - e_n) ** 2))
    return 1.0 - ss_res / ss_tot


def r_squared(draws: PosteriorDraws, data: Dataset) -> float:
    """Predictive coefficient of determination; NaN for constant y."""
    e_n, _ = predictive_moments_at(draws, data.r, data.t.astype(float))
    return _r_squared_from_means(data.y, e_n)


def batch_means_ci(trace, batches: int = DEFAULT_BATCHES):
    """(mean, 95% half-width) of a scalar trace by batch means.

    The trace is split into ``batches`` equal batches (a leading
    remainder is dropped); the half-width is 2 * sd(batch means) /
    sqrt(batches).
    """
    trace = np.asarray(trace, dtype=float)
    if trace.ndim != 1:
        raise ValueError("trace must be one-dimensional")
    if batches < 2:
        raise ValueError("need at least 2 batches")
    if trace.size < 2 * batches:
        raise ShortSeriesError(
            f"trace of length {trace.size} too short for {batches} batches"
        )
    per = trace.size // batches
    used = trace[trace.size - per * batches :]
    means = used.reshape(batches, per).mean(axis=1)
    half = 2.0 * float(np.std(means, ddof=1)) / np.sqrt(batches)
    return float(np.mean(used)), half


def traces(draws: PosteriorDraws) -> Dict[str, np.ndarray]:
    """Named scalar trace series of the retained chain."""
    out = {
        "beta0": draws.beta[:, 0],
        "beta1": draws.beta[:, 1],
        "beta2": draws.beta[:, 2],
        "lam0": draws.lam[:, 0],
        "lam1": draws.lam[:, 1],
        "lam2": draws.lam[:, 2],
        "mu_mu": draws.mu_mu,
        "sigma_mu": draws.sigma_mu,
        "b_sigma": draws.b_sigma,
        "n_occupied": draws.n_occupied.astype(float),
    }
    return out


def convergence_report(
    draws: PosteriorDraws,
    batches: int = DEFAULT_BATCHES,
    threshold: float = DEFAULT_HALF_WIDTH_TARGET,
) -> ConvergenceReport:
    """Batch-means half-widths for every scalar trace of the chain."""
    means = {}
    half_widths = {}
    for name, series in traces(draws).items():
        mean, half = batch_means_ci(series, batches)
        means[name] = mean
        half_widths[name] = half
    return ConvergenceReport(means=means, half_widths=half_widths, threshold=threshold)
