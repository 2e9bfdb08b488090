"""Gibbs sampler for the mixture model, with slice-sampling steps for the
component-mean scale and the log-variance link coefficients.

One sweep updates, in order: allocations, interval latents, component
means and variances (empty window components reduce exactly to prior
draws), the component-mean location and scale, the variance rate, the
location-link coefficients by normal conjugacy, and the spread-link
coefficients by univariate slice sampling.  The binary-regression variant
adds one latent layer: a sign-constrained underlying outcome that stands
in for y throughout the sweep.

All randomness flows through an explicitly passed generator; a chain is a
pure function of (data, hyperparams, config).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .dist import (
    gamma_draws,
    inverse_gamma_draws,
    log_normal_pdf,
    truncated_normal_draws,
)
from .errors import ChainNumericalError
from .model import (
    DEFAULT_WINDOW_EPS,
    LINK_EXPONENT_LIMIT,
    ComponentWindow,
    Dataset,
    Hyperparams,
    ParameterState,
    active_component_window,
    component_log_weights,
    location_link,
    scale_link,
)

__all__ = [
    "McmcConfig",
    "PosteriorDraws",
    "initial_state",
    "prior_draw_state",
    "gibbs_sweep",
    "binary_sweep",
    "run_chain",
    "run_chains",
    "sample_outcomes",
    "MAX_SPREAD_EXPONENT",
]

# The spread-link prior is truncated so that no observation's (or cutoff
# query's) log-variance exponent exceeds this bound.  States beyond it are
# posterior-negligible (every observation pays roughly half the excess in
# log likelihood) but force component windows of millions of entries;
# slice excursions along the saturated flat direction would otherwise
# land there occasionally.
MAX_SPREAD_EXPONENT = 16.0


@dataclass(frozen=True)
class McmcConfig:
    """Chain schedule.  Defaults mirror a long production run: 200K
    sweeps, 2K burn-in, every 5th iterate retained."""

    total_iterations: int = 200_000
    burn_in: int = 2_000
    thin: int = 5
    seed: int = 0
    chains: int = 1

    def __post_init__(self):
        if self.burn_in < 0 or self.burn_in >= self.total_iterations:
            raise ValueError("need 0 <= burn_in < total_iterations")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")

    @property
    def n_retained(self) -> int:
        return (self.total_iterations - self.burn_in) // self.thin


@dataclass
class PosteriorDraws:
    """Thinned chain of state snapshots, padded to a common component
    window for vectorized evaluation.

    ``mask[d, c]`` marks whether column c (component index ``j_index[c]``)
    belonged to draw d's window; padded cells carry NaN and weight 0.
    ``eta_cut``/``sigma_cut`` cache the link evaluations at the two cutoff
    queries (r0, t=0) and (r0, t=1).
    """

    kind: str
    r0: float
    j_lo: int
    j_hi: int
    mu: np.ndarray
    sigma_sq: np.ndarray
    mask: np.ndarray
    beta: np.ndarray
    lam: np.ndarray
    mu_mu: np.ndarray
    sigma_mu: np.ndarray
    b_sigma: np.ndarray
    n_occupied: np.ndarray
    eta_cut: np.ndarray
    sigma_cut: np.ndarray

    def __post_init__(self):
        if self.kind not in ("continuous", "binary"):
            raise ValueError("kind must be 'continuous' or 'binary'")
        d, c = self.mu.shape
        if c != self.j_hi - self.j_lo + 1:
            raise ValueError("component columns must match the window bounds")
        for name in ("sigma_sq", "mask"):
            if getattr(self, name).shape != (d, c):
                raise ValueError(f"{name} must have shape {(d, c)}")

    def __len__(self) -> int:
        return self.mu.shape[0]

    @property
    def j_index(self) -> np.ndarray:
        return np.arange(self.j_lo, self.j_hi + 1)

    @classmethod
    def from_snapshots(cls, snaps: List[dict], kind: str, r0: float) -> "PosteriorDraws":
        if not snaps:
            raise ValueError("no retained draws")
        j_lo = min(s["j_min"] for s in snaps)
        j_hi = max(s["j_max"] for s in snaps)
        d = len(snaps)
        c = j_hi - j_lo + 1
        mu = np.full((d, c), np.nan)
        sigma_sq = np.full((d, c), np.nan)
        mask = np.zeros((d, c), dtype=bool)
        for k, s in enumerate(snaps):
            lo = s["j_min"] - j_lo
            hi = s["j_max"] - j_lo + 1
            mu[k, lo:hi] = s["mu"]
            sigma_sq[k, lo:hi] = s["sigma_sq"]
            mask[k, lo:hi] = True
        return cls(
            kind=kind,
            r0=r0,
            j_lo=j_lo,
            j_hi=j_hi,
            mu=mu,
            sigma_sq=sigma_sq,
            mask=mask,
            beta=np.array([s["beta"] for s in snaps]),
            lam=np.array([s["lam"] for s in snaps]),
            mu_mu=np.array([s["mu_mu"] for s in snaps]),
            sigma_mu=np.array([s["sigma_mu"] for s in snaps]),
            b_sigma=np.array([s["b_sigma"] for s in snaps]),
            n_occupied=np.array([s["n_occupied"] for s in snaps], dtype=int),
            eta_cut=np.array([s["eta_cut"] for s in snaps]),
            sigma_cut=np.array([s["sigma_cut"] for s in snaps]),
        )


def _check_finite(step: str, *arrays):
    for arr in arrays:
        a = np.asarray(arr, dtype=float)
        if not np.all(np.isfinite(a)):
            raise ChainNumericalError(
                f"non-finite conditional parameters in step '{step}'",
                state_summary={"step": step, "values": a},
            )


def _slice_sample(logf, x0, rng, width=1.0, max_steps=50, lower=-math.inf, upper=math.inf):
    """Univariate stepping-out/shrinkage slice sampler, optionally bounded."""
    f0 = logf(x0)
    if not math.isfinite(f0):
        raise ChainNumericalError(
            "slice sampler started at a zero-density point",
            state_summary={"x0": x0, "logf": f0},
        )
    level = f0 + math.log1p(-rng.random())
    u = rng.random()
    lo = x0 - width * u
    hi = lo + width
    steps = max_steps
    while steps > 0 and lo > lower and logf(lo) > level:
        lo -= width
        steps -= 1
    steps = max_steps
    while steps > 0 and hi < upper and logf(hi) > level:
        hi += width
        steps -= 1
    lo = max(lo, lower)
    hi = min(hi, upper)
    for _ in range(1000):
        x1 = lo + rng.random() * (hi - lo)
        if logf(x1) >= level:
            return x1
        if x1 < x0:
            lo = x1
        else:
            hi = x1
    raise ChainNumericalError(
        "slice sampler failed to find an acceptable point",
        state_summary={"x0": x0, "lo": lo, "hi": hi},
    )


def _cutoff_links(beta, lam, r0):
    rr = np.array([r0, r0])
    tt = np.array([0.0, 1.0])
    return location_link(beta, rr, tt), scale_link(lam, rr, tt)


def _build_window(beta, lam, data: Dataset, alloc=None, eps=DEFAULT_WINDOW_EPS):
    eta = location_link(beta, data.r, data.t)
    sig = scale_link(lam, data.r, data.t)
    q_eta, q_sig = _cutoff_links(beta, lam, data.r0)
    j_lo, j_hi = active_component_window(
        np.concatenate([eta, q_eta]), np.concatenate([sig, q_sig]), eps
    )
    if alloc is not None:
        j_lo = min(j_lo, int(alloc.min()))
        j_hi = max(j_hi, int(alloc.max()))
    return j_lo, j_hi, eta, sig


def _realign_components(window: ComponentWindow, j_lo, j_hi, mu_mu, sigma_mu, b_sigma, rng):
    """Carry overlapping components into the new window; indices entering
    the window receive fresh prior draws."""
    c = j_hi - j_lo + 1
    mu = mu_mu + sigma_mu * rng.standard_normal(c)
    s2 = inverse_gamma_draws(1.0, b_sigma, rng, size=c)
    lo = max(window.j_min, j_lo)
    hi = min(window.j_max, j_hi)
    if lo <= hi:
        mu[lo - j_lo : hi - j_lo + 1] = window.mu[lo - window.j_min : hi - window.j_min + 1]
        s2[lo - j_lo : hi - j_lo + 1] = window.sigma_sq[
            lo - window.j_min : hi - window.j_min + 1
        ]
    return mu, s2


def _sample_allocations(y_work, eta, sig, j_lo, j_hi, mu_w, s2_w, rng):
    """Component indices from the discrete conditional proportional to
    weight times component likelihood, interval latent marginalized."""
    j_idx = np.arange(j_lo, j_hi + 1)
    logw = component_log_weights(j_idx[None, :], eta[:, None], sig[:, None])
    loglik = log_normal_pdf(y_work[:, None], mu_w[None, :], np.sqrt(s2_w)[None, :])
    logp = logw + loglik
    rowmax = logp.max(axis=1)
    if not np.all(np.isfinite(rowmax)):
        raise ChainNumericalError(
            "allocation conditional vanished for some observation",
            state_summary={"rows": np.nonzero(~np.isfinite(rowmax))[0]},
        )
    p = np.exp(logp - rowmax[:, None])
    csum = np.cumsum(p, axis=1)
    u = rng.random(y_work.size) * csum[:, -1]
    idx = np.minimum((csum < u[:, None]).sum(axis=1), j_hi - j_lo)
    return j_lo + idx


def _sample_latents(eta, sig, alloc, rng):
    """Interval latents on (alloc - 1, alloc]."""
    return truncated_normal_draws(eta, sig, alloc - 1.0, alloc.astype(float), rng)


def _sweep(state: ParameterState, data: Dataset, hp: Hyperparams, rng, binary: bool) -> ParameterState:
    x_mat = data.design_matrix()
    n = data.n

    # Binary variant: refresh the sign-constrained underlying outcome.
    if binary:
        off = state.alloc - state.window.j_min
        mu_i = state.window.mu[off]
        sd_i = np.sqrt(state.window.sigma_sq[off])
        pos = data.y > 0.5
        lower = np.where(pos, 0.0, -np.inf)
        upper = np.where(pos, np.inf, 0.0)
        y_work = truncated_normal_draws(mu_i, sd_i, lower, upper, rng)
    else:
        y_work = data.y

    # Window for the current links, covering data, cutoff queries and all
    # currently allocated indices.
    j_lo, j_hi, eta, sig = _build_window(state.beta, state.lam, data, state.alloc)
    mu_w, s2_w = _realign_components(
        state.window, j_lo, j_hi, state.mu_mu, state.sigma_mu, state.b_sigma, rng
    )

    # (1) allocations, (2) interval latents
    alloc = _sample_allocations(y_work, eta, sig, j_lo, j_hi, mu_w, s2_w, rng)
    z = _sample_latents(eta, sig, alloc, rng)
    idx = alloc - j_lo
    c = j_hi - j_lo + 1

    # (3)-(5) component means and variances; empty components reduce to
    # fresh prior draws through the same conjugate formulas.
    counts = np.bincount(idx, minlength=c)
    sums = np.bincount(idx, weights=y_work, minlength=c)
    prec = 1.0 / (state.sigma_mu**2) + counts / s2_w
    v_mu = 1.0 / prec
    m_mu = v_mu * (state.mu_mu / state.sigma_mu**2 + sums / s2_w)
    _check_finite("component means", m_mu, v_mu)
    mu_w = m_mu + np.sqrt(v_mu) * rng.standard_normal(c)
    resid = y_work - mu_w[idx]
    ssr = np.bincount(idx, weights=resid * resid, minlength=c)
    s2_w = inverse_gamma_draws(1.0 + 0.5 * counts, state.b_sigma + 0.5 * ssr, rng)
    _check_finite("component variances", s2_w)

    # (6) component-mean location
    v0 = 1.0 / (1.0 / hp.sigma0_sq + c / state.sigma_mu**2)
    m0 = v0 * (hp.mu0 / hp.sigma0_sq + mu_w.sum() / state.sigma_mu**2)
    _check_finite("component-mean location", m0, v0)
    mu_mu = m0 + math.sqrt(v0) * rng.standard_normal()

    # (7) component-mean scale by slice sampling on (0, b_sigma_mu)
    ss = float(((mu_w - mu_mu) ** 2).sum())
    ss = max(ss, 1e-300)

    def log_sigma_mu_cond(s):
        if not (0.0 < s < hp.b_sigma_mu):
            return -math.inf
        return -c * math.log(s) - 0.5 * ss / (s * s)

    sigma_mu = _slice_sample(
        log_sigma_mu_cond,
        state.sigma_mu,
        rng,
        width=hp.b_sigma_mu / 4.0,
        lower=0.0,
        upper=hp.b_sigma_mu,
    )

    # (8) component-variance rate
    b_sigma = float(gamma_draws(hp.a0 + c, hp.b0 + float((1.0 / s2_w).sum()), rng))
    _check_finite("variance rate", b_sigma)

    # (9) location-link coefficients by weighted-normal conjugacy on the
    # interval latents.  The per-observation precision is exp(-link
    # exponent) with the exponent clipped to +-500 so deeply saturated
    # spread states cannot overflow the normal equations.
    ell_obs = x_mat @ state.lam
    w_prec = np.exp(-np.clip(ell_obs, -500.0, 500.0))
    xtw = x_mat.T * w_prec
    a_mat = xtw @ x_mat + np.eye(3) / hp.v
    b_vec = xtw @ z
    _check_finite("location-link system", a_mat, b_vec)
    try:
        chol = np.linalg.cholesky(a_mat)
        mean_beta = np.linalg.solve(a_mat, b_vec)
        beta = mean_beta + np.linalg.solve(chol.T, rng.standard_normal(3))
    except np.linalg.LinAlgError:
        # Saturated spread states make the joint system numerically
        # rank-deficient; fall back to exact per-coordinate conjugate
        # draws (same stationary distribution, different blocking).
        beta = _beta_coordinate_pass(x_mat, z, w_prec, state.beta, hp, rng)
    _check_finite("location-link draw", beta)

    # (10) spread-link coefficients, one univariate slice step each
    x_wall = np.vstack([x_mat, [[1.0, data.r0, 0.0], [1.0, data.r0, 1.0]]])
    lam = state.lam.copy()
    eta_new = x_mat @ beta
    for k in range(3):
        xk = x_mat[:, k]
        base = x_mat @ lam - xk * lam[k]
        base_wall = x_wall @ lam - x_wall[:, k] * lam[k]
        resid2 = (z - eta_new) ** 2

        def log_lam_cond(val, base=base, xk=xk, resid2=resid2, base_wall=base_wall, xwk=x_wall[:, k]):
            if np.max(base_wall + xwk * val) > MAX_SPREAD_EXPONENT:
                return -math.inf
            ell = np.clip(base + xk * val, -LINK_EXPONENT_LIMIT, LINK_EXPONENT_LIMIT)
            return float(
                -0.5 * np.sum(ell + resid2 * np.exp(-ell)) - val * val / (2.0 * hp.v)
            )

        lam[k] = _slice_sample(log_lam_cond, lam[k], rng, width=1.0, max_steps=50)
    _check_finite("spread-link draw", lam)

    # (11) collapsed link refresh: slice moves on each link coefficient
    # with the interval latents integrated out (their conditional given the
    # allocations is the product of allocated interval weights), then a
    # fresh latent draw.  Bypassing the latent anchor breaks the
    # metastable feedback between inflated spreads and prior-dominated
    # location draws, which otherwise stalls mixing for thousands of
    # sweeps.
    beta, lam = _collapsed_link_refresh(x_mat, x_wall, alloc, beta, lam, hp, rng)
    eta_final = x_mat @ beta
    sig_final = np.exp(
        0.5 * np.clip(x_mat @ lam, -LINK_EXPONENT_LIMIT, LINK_EXPONENT_LIMIT)
    )
    z = _sample_latents(eta_final, sig_final, alloc, rng)

    return ParameterState(
        window=ComponentWindow(j_lo, j_hi, mu_w, s2_w),
        mu_mu=float(mu_mu),
        sigma_mu=float(sigma_mu),
        b_sigma=float(b_sigma),
        beta=beta,
        lam=lam,
        z=z,
        alloc=alloc,
        y_latent=y_work if binary else None,
    )


def _beta_coordinate_pass(x_mat, z, w_prec, beta_start, hp: Hyperparams, rng):
    """One exact coordinate-wise scan of the location-link conditional."""
    beta = beta_start.copy()
    for k in range(3):
        xk = x_mat[:, k]
        eta_rest = x_mat @ beta - xk * beta[k]
        prec = float(np.sum(w_prec * xk * xk)) + 1.0 / hp.v
        mean = float(np.sum(w_prec * xk * (z - eta_rest))) / prec
        beta[k] = mean + rng.standard_normal() / math.sqrt(prec)
    return beta


def _collapsed_link_refresh(x_mat, x_wall, alloc, beta, lam, hp: Hyperparams, rng):
    """Slice moves on the six link coefficients under the collapsed
    conditional proportional to prior times the product of allocated
    interval weights."""
    beta = beta.copy()
    lam = lam.copy()
    j_alloc = alloc.astype(float)

    def log_target(eta, ell):
        sig = np.exp(0.5 * np.clip(ell, -LINK_EXPONENT_LIMIT, LINK_EXPONENT_LIMIT))
        return float(np.sum(component_log_weights(j_alloc, eta, sig)))

    # Steps (9)/(10) may have moved the links off the allocated intervals;
    # the refresh then has no density to slice from, so leave it to the
    # next sweep's reallocation.
    if not math.isfinite(
        log_target(x_mat @ beta, x_mat @ lam)
    ):
        return beta, lam

    for k in range(3):
        xk = x_mat[:, k]
        base = x_mat @ beta - xk * beta[k]
        ell = x_mat @ lam

        def log_beta_cond(val, base=base, xk=xk, ell=ell):
            return log_target(base + xk * val, ell) - val * val / (2.0 * hp.v)

        beta[k] = _slice_sample(log_beta_cond, beta[k], rng, width=1.0, max_steps=50)

    eta = x_mat @ beta
    for k in range(3):
        xk = x_mat[:, k]
        base = x_mat @ lam - xk * lam[k]
        base_wall = x_wall @ lam - x_wall[:, k] * lam[k]

        def log_lam_cond(val, base=base, xk=xk, eta=eta, base_wall=base_wall, xwk=x_wall[:, k]):
            if np.max(base_wall + xwk * val) > MAX_SPREAD_EXPONENT:
                return -math.inf
            return log_target(eta, base + xk * val) - val * val / (2.0 * hp.v)

        lam[k] = _slice_sample(log_lam_cond, lam[k], rng, width=1.0, max_steps=50)

    _check_finite("collapsed link refresh", beta, lam)
    return beta, lam


def gibbs_sweep(state: ParameterState, data: Dataset, hp: Hyperparams, rng) -> ParameterState:
    """One full scan of the continuous-outcome sampler."""
    return _sweep(state, data, hp, rng, binary=False)


def binary_sweep(state: ParameterState, data: Dataset, hp: Hyperparams, rng) -> ParameterState:
    """One full scan of the binary-outcome (probit-layer) sampler.

    ``data.y`` must be the 0/1 treatment-receipt column and ``data.t`` the
    assignment indicator.
    """
    return _sweep(state, data, hp, rng, binary=True)


def initial_state(data: Dataset, hp: Hyperparams, rng, kind: str = "continuous") -> ParameterState:
    """A dispersed but numerically tame starting state."""
    if kind not in ("continuous", "binary"):
        raise ValueError("kind must be 'continuous' or 'binary'")
    beta = np.array([0.5, 0.0, 0.0])
    lam = np.zeros(3)
    if kind == "binary":
        pos = data.y > 0.5
        y_work = truncated_normal_draws(
            np.zeros(data.n),
            np.ones(data.n),
            np.where(pos, 0.0, -np.inf),
            np.where(pos, np.inf, 0.0),
            rng,
        )
        mu_mu = 0.0
    else:
        y_work = data.y
        mu_mu = float(np.mean(data.y))
    sigma_mu = 0.5 * hp.b_sigma_mu
    b_sigma = 1.0

    j_lo, j_hi, eta, sig = _build_window(beta, lam, data)
    c = j_hi - j_lo + 1
    mu_w = mu_mu + sigma_mu * rng.standard_normal(c)
    s2_w = inverse_gamma_draws(1.0, b_sigma, rng, size=c)
    alloc = _sample_allocations(y_work, eta, sig, j_lo, j_hi, mu_w, s2_w, rng)
    z = _sample_latents(eta, sig, alloc, rng)
    return ParameterState(
        window=ComponentWindow(j_lo, j_hi, mu_w, s2_w),
        mu_mu=mu_mu,
        sigma_mu=sigma_mu,
        b_sigma=b_sigma,
        beta=beta,
        lam=lam,
        z=z,
        alloc=alloc,
        y_latent=y_work if kind == "binary" else None,
    )


def prior_draw_state(data: Dataset, hp: Hyperparams, rng, kind: str = "continuous"):
    """A joint draw (state, outcomes) from the prior and the model.

    Used by prior-reversibility checks: the returned outcomes replace
    ``data.y`` to form a prior-predictive dataset consistent with the
    returned state.
    """
    beta = rng.normal(0.0, math.sqrt(hp.v), size=3)
    x_wall = np.vstack(
        [data.design_matrix(), [[1.0, data.r0, 0.0], [1.0, data.r0, 1.0]]]
    )
    for _ in range(100_000):
        lam = rng.normal(0.0, math.sqrt(hp.v), size=3)
        if np.max(x_wall @ lam) <= MAX_SPREAD_EXPONENT:
            break
    else:
        raise ChainNumericalError(
            "could not draw spread-link coefficients inside the truncation wall"
        )
    mu_mu = rng.normal(hp.mu0, math.sqrt(hp.sigma0_sq))
    sigma_mu = rng.uniform(0.0, hp.b_sigma_mu)
    while sigma_mu == 0.0:
        sigma_mu = rng.uniform(0.0, hp.b_sigma_mu)
    b_sigma = float(gamma_draws(hp.a0, hp.b0, rng))

    j_lo, j_hi, eta, sig = _build_window(beta, lam, data)
    c = j_hi - j_lo + 1
    mu_w = mu_mu + sigma_mu * rng.standard_normal(c)
    s2_w = inverse_gamma_draws(1.0, b_sigma, rng, size=c)

    z = rng.normal(eta, sig)
    alloc = np.ceil(z).astype(int)
    # The window captures all but eps of the latent mass; clip the rare
    # stragglers so the state stays coherent.
    clipped = np.clip(alloc, j_lo, j_hi)
    moved = clipped != alloc
    if np.any(moved):
        z = np.where(moved, clipped - 0.5, z)
        alloc = clipped
    idx = alloc - j_lo
    y = rng.normal(mu_w[idx], np.sqrt(s2_w[idx]))
    if kind == "binary":
        outcomes = (y > 0.0).astype(float)
        y_latent = y
    else:
        outcomes = y
        y_latent = None
    state = ParameterState(
        window=ComponentWindow(j_lo, j_hi, mu_w, s2_w),
        mu_mu=float(mu_mu),
        sigma_mu=float(sigma_mu),
        b_sigma=b_sigma,
        beta=beta,
        lam=lam,
        z=z,
        alloc=alloc,
        y_latent=y_latent,
    )
    return state, outcomes


def sample_outcomes(state: ParameterState, r, t, rng):
    """One outcome draw per covariate row from the state's mixture."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    eta = location_link(state.beta, r, t)
    sig = scale_link(state.lam, r, t)
    z = rng.normal(eta, sig)
    alloc = np.clip(np.ceil(z).astype(int), state.window.j_min, state.window.j_max)
    idx = alloc - state.window.j_min
    return rng.normal(state.window.mu[idx], np.sqrt(state.window.sigma_sq[idx]))


def _snapshot(state: ParameterState, r0: float) -> dict:
    eta_cut, sigma_cut = _cutoff_links(state.beta, state.lam, r0)
    return {
        "j_min": state.window.j_min,
        "j_max": state.window.j_max,
        "mu": state.window.mu.copy(),
        "sigma_sq": state.window.sigma_sq.copy(),
        "mu_mu": state.mu_mu,
        "sigma_mu": state.sigma_mu,
        "b_sigma": state.b_sigma,
        "beta": state.beta.copy(),
        "lam": state.lam.copy(),
        "n_occupied": state.n_occupied,
        "eta_cut": np.asarray(eta_cut, dtype=float),
        "sigma_cut": np.asarray(sigma_cut, dtype=float),
    }


def run_chain(
    data: Dataset,
    hp: Hyperparams,
    cfg: McmcConfig,
    kind: str = "continuous",
    rng: Optional[np.random.Generator] = None,
) -> PosteriorDraws:
    """Run one chain and return the thinned, retained draws.

    Deterministic under a fixed config seed.  For ``kind='binary'`` the
    outcome column must be 0/1.
    """
    if kind not in ("continuous", "binary"):
        raise ValueError("kind must be 'continuous' or 'binary'")
    if kind == "binary" and not np.all((data.y == 0.0) | (data.y == 1.0)):
        raise ValueError("binary model requires a 0/1 outcome column")
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    state = initial_state(data, hp, rng, kind)
    binary = kind == "binary"
    snaps: List[dict] = []
    for it in range(1, cfg.total_iterations + 1):
        state = _sweep(state, data, hp, rng, binary)
        if it > cfg.burn_in and (it - cfg.burn_in) % cfg.thin == 0:
            snaps.append(_snapshot(state, data.r0))
    return PosteriorDraws.from_snapshots(snaps, kind, data.r0)


def run_chains(
    data: Dataset, hp: Hyperparams, cfg: McmcConfig, kind: str = "continuous"
) -> List[PosteriorDraws]:
    """Run ``cfg.chains`` chains on independent split streams."""
    seq = np.random.SeedSequence(cfg.seed)
    out = []
    for child in seq.spawn(cfg.chains):
        rng = np.random.Generator(np.random.PCG64(child))
        out.append(run_chain(data, hp, cfg, kind, rng=rng))
    return out
