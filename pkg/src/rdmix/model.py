"""Domain types and deterministic evaluation of the infinite probit mixture.

The outcome density at covariates (r, t) is a countable normal mixture

    f(y | r, t) = sum_j n(y | mu_j, sigma_j^2) * w_j(eta(r, t), sigma(r, t))

whose weights are consecutive standard-normal cdf differences indexed by
the integers, with location ``eta(r, t) = beta0 + beta1*r + beta2*t`` and
spread ``sigma(r, t) = exp((lam0 + lam1*r + lam2*t) / 2)``.  Everything in
this module is pure given an immutable :class:`ParameterState`; sampling
lives in :mod:`rdmix.sampler`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import RdmixError

__all__ = [
    "Hyperparams",
    "Dataset",
    "ComponentWindow",
    "ParameterState",
    "OutcomeFunctional",
    "location_link",
    "scale_link",
    "component_log_weights",
    "component_weights",
    "active_component_window",
    "window_mass",
    "state_weights",
    "mixture_density",
    "mixture_cdf",
    "mixture_mean",
    "mixture_variance",
    "mixture_quantile",
    "functional_eval",
    "LINK_EXPONENT_LIMIT",
    "DEFAULT_WINDOW_EPS",
    "MAX_WINDOW_COMPONENTS",
]

logger = logging.getLogger(__name__)

LINK_EXPONENT_LIMIT = 700.0
DEFAULT_WINDOW_EPS = 1e-12
MAX_WINDOW_COMPONENTS = 200_000


@dataclass(frozen=True)
class Hyperparams:
    """Prior constants of the mixture model.

    Defaults realize the vague-prior choices: a nearly flat normal on the
    component-mean location (``sigma0_sq = 1e10``), a near-Jeffreys gamma
    on the scale rate (``a0 = b0 = 1e-3``), ``v = 1e5`` on the link
    coefficients and a uniform prior half-width ``b_sigma_mu = 5`` suited
    to outcomes standardized to unit variance.
    """

    mu0: float = 0.0
    sigma0_sq: float = 1e10
    a0: float = 1e-3
    b0: float = 1e-3
    v: float = 1e5
    b_sigma_mu: float = 5.0

    def __post_init__(self):
        for name in ("sigma0_sq", "a0", "b0", "v", "b_sigma_mu"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class Dataset:
    """Observations (y_i, r_i, t_i) with a known cutoff r0.

    ``t`` is the binary treatment-receipt column; the derived assignment
    indicator is ``assigned = 1{r >= r0}``.  Ties at the cutoff count as
    assigned.
    """

    y: np.ndarray
    r: np.ndarray
    t: np.ndarray
    r0: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        r = np.asarray(self.r, dtype=float)
        t = np.asarray(self.t, dtype=int)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "t", t)
        if y.ndim != 1 or y.shape != r.shape or y.shape != t.shape:
            raise ValueError("y, r, t must be 1-d arrays of equal length")
        if y.size < 2:
            raise ValueError("need at least 2 observations")
        if not np.all(np.isfinite(y)):
            raise ValueError("non-finite outcome values")
        if not np.all(np.isfinite(r)):
            raise ValueError("non-finite assignment-variable values")
        if not math.isfinite(self.r0):
            raise ValueError("cutoff must be finite")
        if not np.all((t == 0) | (t == 1)):
            raise ValueError("treatment column must be 0/1")
        a = r >= self.r0
        if not (a.any() and (~a).any()):
            raise ValueError("both sides of the cutoff must be nonempty")

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def assigned(self) -> np.ndarray:
        """Derived assignment indicator 1{r >= r0}."""
        return (self.r >= self.r0).astype(int)

    def design_matrix(self) -> np.ndarray:
        """(n, 3) matrix with columns (1, r, t)."""
        return np.column_stack(
            [np.ones(self.n), self.r, self.t.astype(float)]
        )

    def assignment_covariate_view(self) -> "Dataset":
        """Same outcome, with the treatment covariate replaced by the
        assignment indicator (the fuzzy-design numerator regression)."""
        return Dataset(self.y, self.r, self.assigned, self.r0)

    def receipt_outcome_view(self) -> "Dataset":
        """Treatment receipt as the outcome, assignment indicator as the
        binary covariate (the fuzzy-design denominator regression)."""
        return Dataset(self.t.astype(float), self.r, self.assigned, self.r0)


@dataclass(frozen=True)
class ComponentWindow:
    """Finite block of consecutive mixture components j_min..j_max."""

    j_min: int
    j_max: int
    mu: np.ndarray
    sigma_sq: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        sigma_sq = np.asarray(self.sigma_sq, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma_sq", sigma_sq)
        if self.j_min > self.j_max:
            raise ValueError("j_min must not exceed j_max")
        size = self.j_max - self.j_min + 1
        if mu.shape != (size,) or sigma_sq.shape != (size,):
            raise ValueError("component arrays must match the window size")
        if not np.all(sigma_sq > 0.0):
            raise ValueError("component variances must be positive")

    def __len__(self) -> int:
        return self.j_max - self.j_min + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)


@dataclass(frozen=True)
class ParameterState:
    """One configuration of the mixture: window components, their shared
    hyperparameters, link coefficients and the latent allocation layer.

    ``lam`` holds the log-variance link coefficients.  ``y_latent`` is the
    underlying continuous outcome of the binary-regression variant (None
    for the continuous model).
    """

    window: ComponentWindow
    mu_mu: float
    sigma_mu: float
    b_sigma: float
    beta: np.ndarray
    lam: np.ndarray
    z: np.ndarray
    alloc: np.ndarray
    y_latent: Optional[np.ndarray] = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        lam = np.asarray(self.lam, dtype=float)
        z = np.asarray(self.z, dtype=float)
        alloc = np.asarray(self.alloc, dtype=int)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "alloc", alloc)
        if beta.shape != (3,) or lam.shape != (3,):
            raise ValueError("beta and lam must have shape (3,)")
        if z.shape != alloc.shape:
            raise ValueError("z and alloc must align")
        if self.y_latent is not None:
            yl = np.asarray(self.y_latent, dtype=float)
            object.__setattr__(self, "y_latent", yl)
            if yl.shape != z.shape:
                raise ValueError("y_latent must align with z")

    def validate(self, hp: Hyperparams | None = None) -> None:
        """Check the allocation/latent coherence invariants."""
        if not np.all(np.ceil(self.z).astype(int) == self.alloc):
            raise ValueError("ceil(z_i) must equal the allocated index")
        if self.alloc.min() < self.window.j_min or self.alloc.max() > self.window.j_max:
            raise ValueError("allocations fall outside the component window")
        if not (self.sigma_mu > 0.0):
            raise ValueError("sigma_mu must be positive")
        if hp is not None and not (self.sigma_mu < hp.b_sigma_mu):
            raise ValueError("sigma_mu must lie below its prior upper bound")

    @property
    def n_occupied(self) -> int:
        return int(np.unique(self.alloc).size)


@dataclass(frozen=True)
class OutcomeFunctional:
    """A summary of the outcome law to contrast across the cutoff.

    ``kind`` is one of mean, variance, cdf, density, survival, quantile,
    indicator (the last equals the cdf); point kinds carry the evaluation
    point in ``value``.
    """

    kind: str
    value: Optional[float] = None

    _POINT_KINDS = ("cdf", "density", "survival", "indicator")

    def __post_init__(self):
        if self.kind in ("mean", "variance"):
            if self.value is not None:
                raise ValueError(f"{self.kind} functional takes no argument")
        elif self.kind in self._POINT_KINDS:
            if self.value is None or not math.isfinite(self.value):
                raise ValueError(f"{self.kind} functional needs a finite point")
        elif self.kind == "quantile":
            if self.value is None or not (0.0 < self.value < 1.0):
                raise ValueError("quantile functional needs u in (0, 1)")
        else:
            raise ValueError(f"unknown functional kind {self.kind!r}")

    @staticmethod
    def mean() -> "OutcomeFunctional":
        return OutcomeFunctional("mean")

    @staticmethod
    def variance() -> "OutcomeFunctional":
        return OutcomeFunctional("variance")

    @staticmethod
    def cdf_at(y: float) -> "OutcomeFunctional":
        return OutcomeFunctional("cdf", float(y))

    @staticmethod
    def density_at(y: float) -> "OutcomeFunctional":
        return OutcomeFunctional("density", float(y))

    @staticmethod
    def survival_at(y: float) -> "OutcomeFunctional":
        return OutcomeFunctional("survival", float(y))

    @staticmethod
    def quantile_at(u: float) -> "OutcomeFunctional":
        return OutcomeFunctional("quantile", float(u))

    @staticmethod
    def indicator_leq(y: float) -> "OutcomeFunctional":
        return OutcomeFunctional("indicator", float(y))

    def label(self) -> str:
        if self.value is None:
            return self.kind
        return f"{self.kind}({self.value:g})"


def location_link(beta, r, t):
    """Linear location link beta0 + beta1*r + beta2*t."""
    beta = np.asarray(beta, dtype=float)
    return beta[0] + beta[1] * np.asarray(r, dtype=float) + beta[2] * np.asarray(
        t, dtype=float
    )


def scale_link(lam, r, t):
    """Log-linear spread link; returns the standard deviation
    exp((lam0 + lam1*r + lam2*t) / 2).

    The exponent is clamped to +-LINK_EXPONENT_LIMIT with a logged warning
    to guard exp overflow.
    """
    lam = np.asarray(lam, dtype=float)
    expo = lam[0] + lam[1] * np.asarray(r, dtype=float) + lam[2] * np.asarray(
        t, dtype=float
    )
    clipped = np.clip(expo, -LINK_EXPONENT_LIMIT, LINK_EXPONENT_LIMIT)
    if np.any(clipped != expo):
        logger.warning("scale link exponent clamped to +-%g", LINK_EXPONENT_LIMIT)
    return np.exp(0.5 * clipped)


def component_log_weights(j, eta, sigma):
    """log of w_j(eta, sigma) = Phi((j-eta)/sigma) - Phi((j-1-eta)/sigma).

    Broadcasts over all arguments.  Evaluated through log_ndtr with a
    reflection into the lower tail, so far-tail weights keep relative
    accuracy instead of cancelling to zero.
    """
    j = np.asarray(j, dtype=float)
    eta = np.asarray(eta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    upper = (j - eta) / sigma
    lower = (j - 1.0 - eta) / sigma
    flip = lower >= 0.0
    hi = np.where(flip, -lower, upper)
    lo = np.where(flip, -upper, lower)
    log_hi = log_ndtr(hi)
    log_lo = log_ndtr(lo)
    with np.errstate(divide="ignore"):
        out = log_hi + np.log1p(-np.exp(np.minimum(log_lo - log_hi, 0.0)))
    return out


def component_weights(j, eta, sigma):
    """w_j(eta, sigma); values in [0, 1], summing to 1 over all integers j."""
    return np.exp(component_log_weights(j, eta, sigma))


def window_mass(j_min, j_max, eta, sigma):
    """Total weight the window [j_min, j_max] captures at (eta, sigma).

    The component weights telescope, so the mass is a single stable cdf
    difference (reflected into the lower tail when both bounds sit above
    the location).
    """
    upper = (np.asarray(j_max, dtype=float) - np.asarray(eta, dtype=float)) / sigma
    lower = (np.asarray(j_min, dtype=float) - 1.0 - np.asarray(eta, dtype=float)) / sigma
    flip = lower >= 0.0
    hi = np.where(flip, -lower, upper)
    lo = np.where(flip, -upper, lower)
    return ndtr(hi) - ndtr(lo)


def _interval_mass(j_min, j_max, eta, sigma):
    return window_mass(j_min, j_max, eta, sigma)


def active_component_window(eta_values, sigma_values, eps=DEFAULT_WINDOW_EPS):
    """Smallest index window capturing at least 1 - eps of the weight at
    every supplied (eta, sigma) pair.

    Per pair the eps/2 quantile indices get a one-component safety margin;
    the union over pairs is then grown symmetrically until every pair's
    captured mass verifies >= 1 - eps.
    """
    eta = np.atleast_1d(np.asarray(eta_values, dtype=float))
    sigma = np.atleast_1d(np.asarray(sigma_values, dtype=float))
    if eta.size == 0 or sigma.size == 0:
        raise ValueError("need at least one (eta, sigma) pair")
    if eta.shape != sigma.shape:
        raise ValueError("eta and sigma lists must align")
    if not (0.0 < eps <= 1e-6):
        raise ValueError("eps must lie in (0, 1e-6]")
    if np.any(sigma <= 0.0):
        raise ValueError("sigma values must be positive")

    z_lo = ndtri(eps / 2.0)
    z_hi = -z_lo
    j_min = int(np.min(np.ceil(eta + sigma * z_lo))) - 1
    j_max = int(np.max(np.ceil(eta + sigma * z_hi))) + 1

    while True:
        if j_max - j_min + 1 > MAX_WINDOW_COMPONENTS:
            raise RdmixError(
                "component window exceeded "
                f"{MAX_WINDOW_COMPONENTS} components; spread link is degenerate"
            )
        mass = _interval_mass(j_min, j_max, eta, sigma)
        if np.all(mass >= 1.0 - eps):
            return j_min, j_max
        j_min -= 1
        j_max += 1


def state_weights(state: ParameterState, r, t):
    """Component weights of ``state`` at covariates (r, t), renormalized
    within the window (a <= eps correction when the window was built to
    cover the query)."""
    eta = location_link(state.beta, r, t)
    sigma = scale_link(state.lam, r, t)
    w = component_weights(state.window.indices, eta, sigma)
    total = w.sum()
    if total <= 0.0:
        raise RdmixError("query point carries no weight inside the window")
    return w / total


def _weighted_moments(w, mu, sigma_sq, axis=-1):
    mean = np.sum(w * mu, axis=axis)
    second = np.sum(w * (sigma_sq + mu * mu), axis=axis)
    var = np.maximum(second - mean * mean, 0.0)
    return mean, var


def mixture_pdf_values(y, w, mu, sigma_sq):
    """Mixture density at points y for component arrays (..., C)."""
    y = np.asarray(y, dtype=float)
    sd = np.sqrt(sigma_sq)
    z = (y[..., None] - mu) / sd
    kern = np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))
    return np.sum(w * kern, axis=-1)

def mixture_cdf_values(y, w, mu, sigma_sq):
    """Mixture cdf at points y for component arrays (..., C)."""
    y = np.asarray(y, dtype=float)
    sd = np.sqrt(sigma_sq)
    z = (y[..., None] - mu) / sd
    return np.sum(w * ndtr(z), axis=-1)


def mixture_density(y, r, t, state: ParameterState):
    """f(y | r, t) under ``state``; vectorized over y."""
    w = state_weights(state, r, t)
    out = mixture_pdf_values(np.atleast_1d(y), w, state.window.mu, state.window.sigma_sq)
    return out if np.ndim(y) else float(out[0])


def mixture_cdf(y, r, t, state: ParameterState):
    """F(y | r, t) under ``state``; vectorized over y."""
    w = state_weights(state, r, t)
    out = mixture_cdf_values(np.atleast_1d(y), w, state.window.mu, state.window.sigma_sq)
    return out if np.ndim(y) else float(out[0])


def mixture_mean(r, t, state: ParameterState) -> float:
    w = state_weights(state, r, t)
    mean, _ = _weighted_moments(w, state.window.mu, state.window.sigma_sq)
    return float(mean)


def mixture_variance(r, t, state: ParameterState) -> float:
    w = state_weights(state, r, t)
    _, var = _weighted_moments(w, state.window.mu, state.window.sigma_sq)
    return float(var)


def mixture_fourth_central(r, t, state: ParameterState) -> float:
    """Fourth central moment of the mixture about its own mean."""
    w = state_weights(state, r, t)
    mu, s2 = state.window.mu, state.window.sigma_sq
    mean = float(np.sum(w * mu))
    d = mu - mean
    return float(np.sum(w * (3.0 * s2 * s2 + 6.0 * s2 * d * d + d ** 4)))


def _bisect_cdf(cdf, u, lo, hi, tol=1e-8, max_expand=400, max_iter=200):
    """Invert a nondecreasing cdf by bracket expansion plus bisection."""
    flo, fhi = cdf(lo), cdf(hi)
    span = hi - lo
    expansions = 0
    while flo > u:
        lo -= span
        span *= 2.0
        flo = cdf(lo)
        expansions += 1
        if expansions > max_expand or not math.isfinite(lo):
            raise RdmixError("quantile bracket expansion overflowed (lower)")
    expansions = 0
    span = hi - lo
    while fhi < u:
        hi += span
        span *= 2.0
        fhi = cdf(hi)
        expansions += 1
        if expansions > max_expand or not math.isfinite(hi):
            raise RdmixError("quantile bracket expansion overflowed (upper)")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = cdf(mid)
        if abs(fm - u) <= tol and (hi - lo) <= 1e-9 * max(1.0, abs(mid)):
            return mid
        if fm < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mixture_quantile(u, r, t, state: ParameterState) -> float:
    """u-th quantile of the mixture at (r, t) by bracketed bisection."""
    if not (0.0 < u < 1.0):
        raise ValueError("quantile level must lie in (0, 1)")
    w = state_weights(state, r, t)
    mean, var = _weighted_moments(w, state.window.mu, state.window.sigma_sq)
    sd = math.sqrt(max(var, 1e-300))

    def cdf(yy):
        return float(
            mixture_cdf_values(np.atleast_1d(yy), w, state.window.mu, state.window.sigma_sq)[0]
        )

    return float(_bisect_cdf(cdf, u, mean - 8.0 * sd, mean + 8.0 * sd))


def functional_eval(h: OutcomeFunctional, r, t, state: ParameterState) -> float:
    """Evaluate one outcome functional of the mixture at (r, t)."""
    if h.kind == "mean":
        return mixture_mean(r, t, state)
    if h.kind == "variance":
        return mixture_variance(r, t, state)
    if h.kind in ("cdf", "indicator"):
        return float(mixture_cdf(h.value, r, t, state))
    if h.kind == "survival":
        return 1.0 - float(mixture_cdf(h.value, r, t, state))
    if h.kind == "density":
        return float(mixture_density(h.value, r, t, state))
    if h.kind == "quantile":
        return mixture_quantile(h.value, r, t, state)
    raise ValueError(f"unknown functional kind {h.kind!r}")
