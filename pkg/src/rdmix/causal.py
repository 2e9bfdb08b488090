"""Sharp and fuzzy causal-effect estimators at the cutoff.

The sharp estimator contrasts posterior predictive expectations of an
outcome functional under the two intervention queries (r0, t=1) and
(r0, t=0); its posterior variance sums the two predictive variances.  The
fuzzy estimators divide by the adherence denominator: the jump in the
treatment-receipt probability at the cutoff, estimated by the
binary-outcome regression.

Variance conventions per functional kind:

* mean, variance, cdf, survival, indicator: the predictive variance is
  the posterior expectation of squared deviation about the predictive
  mean (total variance over draws and outcomes).
* quantile, density: these are derived per-draw quantities rather than
  expectations of a fixed outcome function, so the posterior variance
  across draws of the per-draw functional is used on each side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InsufficientDrawsError, ZeroDenominatorError
from .model import OutcomeFunctional
from .predictive import (
    per_draw_cdf_at,
    per_draw_fourth_central,
    per_draw_moments,
    per_draw_pdf_at,
    per_draw_quantiles,
    per_draw_success_prob,
    per_draw_weights,
    pp_plot_data,
    predictive_quantile,
)
from .sampler import PosteriorDraws

__all__ = [
    "CausalEffectEstimate",
    "sharp_effect",
    "adherence_denominator",
    "fuzzy_effect_first_order",
    "fuzzy_effect_second_order",
    "fuzzy_effect_posterior_ratio",
    "adherence_sensitivity",
    "quantile_effect",
    "DENOMINATOR_FLOOR",
]

DENOMINATOR_FLOOR = 1e-6
_PAIR_DENOMINATOR_FLOOR = 1e-8


@dataclass(frozen=True)
class CausalEffectEstimate:
    """Point estimate, posterior variance and 95% band for one functional.

    ``denominator`` is the treatment-adherence jump E(D_T) used by fuzzy
    designs (1 for sharp); ``denominator_variance`` its predictive
    variance.  ``significant`` is set only by the quantile-effect check.
    """

    functional: OutcomeFunctional
    design: str
    point: float
    posterior_variance: float
    denominator: float = 1.0
    denominator_variance: float = 0.0
    n_excluded_pairs: int = 0
    significant: Optional[bool] = None

    def __post_init__(self):
        if self.design not in (
            "sharp",
            "fuzzy-first-order",
            "fuzzy-second-order",
            "fuzzy-posterior-ratio",
        ):
            raise ValueError(f"unknown design {self.design!r}")
        if self.posterior_variance < 0.0:
            raise ValueError("posterior variance must be nonnegative")
        if self.design == "sharp" and self.denominator != 1.0:
            raise ValueError("sharp design forces denominator 1")

    @property
    def band95(self) -> Tuple[float, float]:
        half = 2.0 * math.sqrt(self.posterior_variance)
        return (self.point - half, self.point + half)

    def to_dict(self) -> dict:
        lo, hi = self.band95
        out = {
            "functional": self.functional.label(),
            "design": self.design,
            "point": self.point,
            "posterior_variance": self.posterior_variance,
            "band95": [lo, hi],
            "denominator": self.denominator,
            "denominator_variance": self.denominator_variance,
        }
        if self.n_excluded_pairs:
            out["n_excluded_pairs"] = self.n_excluded_pairs
        if self.significant is not None:
            out["significant"] = self.significant
        return out


def _h_first_two_moments(draws: PosteriorDraws, r: float, t: float, h: OutcomeFunctional):
    """Per-draw E(H | draw) and E(H^2 | draw) for expectation-type
    functionals."""
    w = per_draw_weights(draws, r, t)
    if h.kind == "mean":
        m, v = per_draw_moments(draws, r, t, w=w)
        return m, v + m * m
    if h.kind == "variance":
        m, v = per_draw_moments(draws, r, t, w=w)
        m4 = per_draw_fourth_central(draws, r, t, w=w)
        return v, m4
    if h.kind in ("cdf", "indicator"):
        f = per_draw_cdf_at(draws, w, float(h.value))
        return f, f
    if h.kind == "survival":
        s = 1.0 - per_draw_cdf_at(draws, w, float(h.value))
        return s, s
    raise ValueError(f"{h.kind} is not an expectation-type functional")


def _per_draw_values(draws: PosteriorDraws, r: float, t: float, h: OutcomeFunctional):
    """Per-draw value of a derived (non-expectation) functional."""
    if h.kind == "quantile":
        return per_draw_quantiles(draws, r, t, float(h.value))
    if h.kind == "density":
        w = per_draw_weights(draws, r, t)
        return per_draw_pdf_at(draws, w, float(h.value))
    raise ValueError(f"{h.kind} is not a derived functional")


def sharp_effect(draws_y: PosteriorDraws, r0: float, h: OutcomeFunctional) -> CausalEffectEstimate:
    """Difference of the functional's predictive expectation between the
    treated and untreated cutoff queries, with summed predictive
    variances."""
    if h.kind in ("quantile", "density"):
        if h.kind == "quantile":
            point = predictive_quantile(draws_y, r0, 1, float(h.value)) - predictive_quantile(
                draws_y, r0, 0, float(h.value)
            )
        else:
            point = float(
                np.mean(_per_draw_values(draws_y, r0, 1, h))
                - np.mean(_per_draw_values(draws_y, r0, 0, h))
            )
        v1 = float(np.var(_per_draw_values(draws_y, r0, 1, h)))
        v0 = float(np.var(_per_draw_values(draws_y, r0, 0, h)))
        variance = v1 + v0
    else:
        e1_1, e2_1 = _h_first_two_moments(draws_y, r0, 1, h)
        e1_0, e2_0 = _h_first_two_moments(draws_y, r0, 0, h)
        mean1 = float(np.mean(e1_1))
        mean0 = float(np.mean(e1_0))
        v1 = max(float(np.mean(e2_1)) - mean1 * mean1, 0.0)
        v0 = max(float(np.mean(e2_0)) - mean0 * mean0, 0.0)
        point = mean1 - mean0
        variance = v1 + v0
    return CausalEffectEstimate(
        functional=h,
        design="sharp",
        point=point,
        posterior_variance=variance,
    )


def adherence_denominator(draws_t: PosteriorDraws, r0: float) -> Tuple[float, float]:
    """Jump in the treatment-receipt probability at the cutoff and its
    predictive variance, from binary-model draws fitted on covariates
    (r, 1{r >= r0}).

    Raises :class:`ZeroDenominatorError` when the jump is numerically
    zero (the fuzzy ratio is then unidentified).
    """
    p1 = per_draw_success_prob(draws_t, r0, 1)
    p0 = per_draw_success_prob(draws_t, r0, 0)
    e1 = float(np.mean(p1))
    e0 = float(np.mean(p0))
    den = e1 - e0
    if abs(den) < DENOMINATOR_FLOOR:
        raise ZeroDenominatorError(
            f"adherence denominator {den:.3g} is numerically zero; "
            "no identification"
        )
    var = e1 * (1.0 - e1) + e0 * (1.0 - e0)
    return den, var


def _check_denominator(value: float) -> None:
    if abs(value) < DENOMINATOR_FLOOR:
        raise ZeroDenominatorError(
            f"denominator {value:.3g} is numerically zero; ratio undefined"
        )


def fuzzy_effect_first_order(
    sharp: CausalEffectEstimate, denominator: Tuple[float, float]
) -> CausalEffectEstimate:
    """First-order Taylor ratio estimate and its ratio-variance.

    The variance is evaluated in the algebraically simplified form
    (V_sharp + point^2 * V_den / den^2) / den^2, which is finite at a
    zero sharp estimate and identical elsewhere.
    """
    den, den_var = denominator
    _check_denominator(den)
    point = sharp.point / den
    variance = (sharp.posterior_variance + sharp.point**2 * den_var / den**2) / den**2
    return CausalEffectEstimate(
        functional=sharp.functional,
        design="fuzzy-first-order",
        point=point,
        posterior_variance=variance,
        denominator=den,
        denominator_variance=den_var,
    )


def fuzzy_effect_second_order(
    sharp: CausalEffectEstimate, denominator: Tuple[float, float]
) -> CausalEffectEstimate:
    """Second-order ratio correction; shares the first-order variance."""
    den, den_var = denominator
    _check_denominator(den)
    point = sharp.point / den + sharp.point * den_var / den**3
    variance = (sharp.posterior_variance + sharp.point**2 * den_var / den**2) / den**2
    return CausalEffectEstimate(
        functional=sharp.functional,
        design="fuzzy-second-order",
        point=point,
        posterior_variance=variance,
        denominator=den,
        denominator_variance=den_var,
    )


def fuzzy_effect_posterior_ratio(
    draws_y: PosteriorDraws,
    draws_t: PosteriorDraws,
    r0: float,
    h: OutcomeFunctional,
) -> CausalEffectEstimate:
    """Posterior average of the per-draw-pair ratio.

    Draw pairs are matched by index (the two posteriors are independent
    given the data, so index pairing is a valid joint sample).  Pairs
    whose denominator is below 1e-8 in magnitude are excluded and
    counted; more than half excluded is an identification failure.
    """
    if len(draws_y) == 0 or len(draws_t) == 0:
        raise ValueError("both draw sets must be nonempty")
    m = min(len(draws_y), len(draws_t))
    if h.kind in ("quantile", "density"):
        num = (
            _per_draw_values(draws_y, r0, 1, h)[:m]
            - _per_draw_values(draws_y, r0, 0, h)[:m]
        )
    else:
        e1_1, _ = _h_first_two_moments(draws_y, r0, 1, h)
        e1_0, _ = _h_first_two_moments(draws_y, r0, 0, h)
        num = e1_1[:m] - e1_0[:m]
    den = (
        per_draw_success_prob(draws_t, r0, 1)[:m]
        - per_draw_success_prob(draws_t, r0, 0)[:m]
    )
    keep = np.abs(den) >= _PAIR_DENOMINATOR_FLOOR
    n_excluded = int(m - keep.sum())
    if n_excluded > m // 2:
        raise ZeroDenominatorError(
            f"{n_excluded} of {m} draw pairs had numerically zero denominators"
        )
    ratios = num[keep] / den[keep]
    point = float(np.mean(ratios))
    variance = float(np.var(ratios))
    den_mean = float(np.mean(den[keep]))
    return CausalEffectEstimate(
        functional=h,
        design="fuzzy-posterior-ratio",
        point=point,
        posterior_variance=variance,
        denominator=den_mean,
        denominator_variance=float(np.var(den[keep])),
        n_excluded_pairs=n_excluded,
    )


def adherence_sensitivity(
    sharp: CausalEffectEstimate, denominators: Sequence[float]
) -> list:
    """Fixed-denominator sweep: one first-order estimate per supplied
    nonzero adherence value, each with variance V_sharp / den^2."""
    out = []
    for den in denominators:
        if den == 0.0:
            raise ValueError("sensitivity denominators must be nonzero")
        out.append(
            CausalEffectEstimate(
                functional=sharp.functional,
                design="fuzzy-first-order",
                point=sharp.point / den,
                posterior_variance=sharp.posterior_variance / (den * den),
                denominator=float(den),
                denominator_variance=0.0,
            )
        )
    return out


def quantile_effect(
    draws_y: PosteriorDraws,
    r0: float,
    u: float,
    denominator: Optional[Tuple[float, float] | float] = None,
    grid=None,
) -> CausalEffectEstimate:
    """Quantile treatment effect at level u with a band-overlap
    significance check.

    The point estimate differences the u-quantiles of the averaged
    predictive cdfs (scaled by the adherence denominator when given).
    Significance follows the paired-cdf band rule: the effect is flagged
    significant when the two 95% cdf bands do not overlap at the grid
    point nearest the midpoint of the two quantiles.
    """
    if not (0.0 < u < 1.0):
        raise ValueError("quantile level must lie in (0, 1)")
    if denominator is None:
        den, den_var = 1.0, 0.0
        design = "sharp"
    else:
        if isinstance(denominator, tuple):
            den, den_var = denominator
        else:
            den, den_var = float(denominator), 0.0
        _check_denominator(den)
        design = "fuzzy-first-order"

    q1 = predictive_quantile(draws_y, r0, 1, u)
    q0 = predictive_quantile(draws_y, r0, 0, u)
    diff = q1 - q0
    point = diff / den
    q1_d = per_draw_quantiles(draws_y, r0, 1, u)
    q0_d = per_draw_quantiles(draws_y, r0, 0, u)
    diff_var = float(np.var(q1_d) + np.var(q0_d))
    variance = (diff_var + diff**2 * den_var / den**2) / den**2

    if len(draws_y) < 40:
        raise InsufficientDrawsError(
            "quantile-effect significance needs at least 40 draws"
        )
    if grid is None:
        lo = min(predictive_quantile(draws_y, r0, t, 0.001) for t in (0, 1))
        hi = max(predictive_quantile(draws_y, r0, t, 0.999) for t in (0, 1))
        pad = 0.05 * max(hi - lo, 1e-12)
        grid = np.linspace(lo - pad, hi + pad, 257)
    table = pp_plot_data(draws_y, r0, grid)
    y_star = 0.5 * (q0 + q1)
    row = int(np.argmin(np.abs(np.asarray(grid) - y_star)))
    significant = not bool(table["bands_overlap"][row])

    return CausalEffectEstimate(
        functional=OutcomeFunctional.quantile_at(u),
        design=design,
        point=point,
        posterior_variance=variance,
        denominator=den,
        denominator_variance=den_var,
        significant=significant,
    )
