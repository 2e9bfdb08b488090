"""Chain persistence: a versioned binary file of fixed-width records plus
a flat CSV of per-draw scalars.

Binary layout (all little-endian):

    header (40 bytes)
        magic      8s   b"RDMIXCH1"
        version    <u4  currently 1
        kind       <u4  0 = continuous, 1 = binary
        j_lo       <i4  file component window, lower index
        j_hi       <i4  file component window, upper index
        n_draws    <u8
        r0         <f8  cutoff the cached link evaluations refer to

    then n_draws records of the structured dtype below; per draw the
    component arrays span the file window, padded with NaN outside the
    draw's own [j_min, j_max].
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .sampler import PosteriorDraws

__all__ = ["save_chain", "load_chain", "chain_to_csv"]

_MAGIC = b"RDMIXCH1"
_VERSION = 1
_HEADER = struct.Struct("<8sIIiiQd")
_KIND_CODE = {"continuous": 0, "binary": 1}
_KIND_NAME = {v: k for k, v in _KIND_CODE.items()}


def _record_dtype(n_components: int) -> np.dtype:
    return np.dtype(
        [
            ("j_min", "<i4"),
            ("j_max", "<i4"),
            ("n_occupied", "<i4"),
            ("pad", "<i4"),
            ("beta", "<f8", (3,)),
            ("lam", "<f8", (3,)),
            ("mu_mu", "<f8"),
            ("sigma_mu", "<f8"),
            ("b_sigma", "<f8"),
            ("eta_cut", "<f8", (2,)),
            ("sigma_cut", "<f8", (2,)),
            ("mu", "<f8", (n_components,)),
            ("sigma_sq", "<f8", (n_components,)),
        ]
    )


def save_chain(draws: PosteriorDraws, path) -> None:
    """Write retained draws to the versioned binary chain file."""
    path = Path(path)
    d = len(draws)
    c = draws.j_hi - draws.j_lo + 1
    rec = np.zeros(d, dtype=_record_dtype(c))
    idx = draws.j_index
    j_min = np.where(draws.mask, idx[None, :], np.iinfo(np.int32).max).min(axis=1)
    j_max = np.where(draws.mask, idx[None, :], np.iinfo(np.int32).min).max(axis=1)
    rec["j_min"] = j_min.astype(np.int32)
    rec["j_max"] = j_max.astype(np.int32)
    rec["n_occupied"] = draws.n_occupied.astype(np.int32)
    rec["beta"] = draws.beta
    rec["lam"] = draws.lam
    rec["mu_mu"] = draws.mu_mu
    rec["sigma_mu"] = draws.sigma_mu
    rec["b_sigma"] = draws.b_sigma
    rec["eta_cut"] = draws.eta_cut
    rec["sigma_cut"] = draws.sigma_cut
    rec["mu"] = np.where(draws.mask, draws.mu, np.nan)
    rec["sigma_sq"] = np.where(draws.mask, draws.sigma_sq, np.nan)
    header = _HEADER.pack(
        _MAGIC, _VERSION, _KIND_CODE[draws.kind], draws.j_lo, draws.j_hi, d, draws.r0
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rec.tobytes())


def load_chain(path) -> PosteriorDraws:
    """Read a chain file written by :func:`save_chain`."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated chain file")
    magic, version, kind_code, j_lo, j_hi, n_draws, r0 = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError("not a chain file (bad magic)")
    if version != _VERSION:
        raise ValueError(f"unsupported chain file version {version}")
    c = j_hi - j_lo + 1
    dtype = _record_dtype(c)
    expected = _HEADER.size + n_draws * dtype.itemsize
    if len(raw) != expected:
        raise ValueError("chain file length does not match its header")
    rec = np.frombuffer(raw, dtype=dtype, count=n_draws, offset=_HEADER.size)
    idx = np.arange(j_lo, j_hi + 1)
    mask = (idx[None, :] >= rec["j_min"][:, None]) & (idx[None, :] <= rec["j_max"][:, None])
    return PosteriorDraws(
        kind=_KIND_NAME[kind_code],
        r0=float(r0),
        j_lo=int(j_lo),
        j_hi=int(j_hi),
        mu=rec["mu"].copy(),
        sigma_sq=rec["sigma_sq"].copy(),
        mask=mask,
        beta=rec["beta"].copy(),
        lam=rec["lam"].copy(),
        mu_mu=rec["mu_mu"].copy(),
        sigma_mu=rec["sigma_mu"].copy(),
        b_sigma=rec["b_sigma"].copy(),
        n_occupied=rec["n_occupied"].astype(int).copy(),
        eta_cut=rec["eta_cut"].copy(),
        sigma_cut=rec["sigma_cut"].copy(),
    )


def chain_to_csv(draws: PosteriorDraws, path) -> None:
    """One row per retained draw: link coefficients, shared component
    hyperparameters and the occupied-component count."""
    cols = np.column_stack(
        [
            draws.beta,
            draws.lam,
            draws.mu_mu,
            draws.sigma_mu,
            draws.b_sigma,
            draws.n_occupied.astype(float),
        ]
    )
    header = "beta0,beta1,beta2,lam0,lam1,lam2,mu_mu,sigma_mu,b_sigma,n_occupied"
    np.savetxt(path, cols, fmt="%.17g", delimiter=",", header=header, comments="")
