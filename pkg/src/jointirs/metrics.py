"""SINR, normalized weighted rates and the scalarized UL/DL objective."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, db_to_linear, dbm_to_watt


@dataclass(frozen=True)
class DuplexParams:
    """Per-link power budgets and noise powers (Watts) for one time/band split.

    In FDD the budgets scale with the link's share of the band. A link with a
    zero share carries no rate; it keeps the full-band budget so that its SINR
    (which does not depend on the share) stays well defined.
    """

    alpha: float
    beta: float
    bandwidth: float
    p_max_dl: float
    p_max_ul: float
    noise_dl: float
    noise_ul: float
    duplex: str = "tdd"

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValueError("alpha and beta must lie in [0, 1]")
        if min(self.p_max_dl, self.p_max_ul, self.noise_dl, self.noise_ul) <= 0:
            raise ValueError("powers and noise must be positive")

    @classmethod
    def from_config(cls, config: SystemConfig, alpha=None, beta=None) -> "DuplexParams":
        alpha = config.alpha if alpha is None else float(alpha)
        beta = config.beta if beta is None else float(beta)
        b = config.bandwidth_hz
        p_dl, p_ul = float(dbm_to_watt(config.p_dl_dbm)), float(dbm_to_watt(config.p_ul_dbm))
        n0 = float(dbm_to_watt(config.noise_psd_dbm_hz))
        n0_dl = n0 * float(db_to_linear(config.nf_dl_db))
        n0_ul = n0 * float(db_to_linear(config.nf_ul_db))
        if config.duplex == "fdd":
            share_dl = alpha if alpha > 0 else 1.0
            share_ul = 1.0 - alpha if alpha < 1 else 1.0
        else:
            share_dl = share_ul = 1.0
        return cls(alpha, beta, b, share_dl * p_dl, share_ul * p_ul,
                   share_dl * b * n0_dl, share_ul * b * n0_ul, config.duplex)

    @property
    def dl_coef(self) -> float:
        return self.alpha * self.beta

    @property
    def ul_coef(self) -> float:
        return (1 - self.alpha) * (1 - self.beta)


@dataclass(frozen=True)
class Weights:
    dl: np.ndarray
    ul: np.ndarray

    def __post_init__(self):
        for w in (self.dl, self.ul):
            w = np.asarray(w)
            if np.any(w <= 0) or abs(w.sum() - 1) > 1e-12:
                raise ValueError("weights must be positive and sum to one")

    @property
    def num_users(self) -> int:
        return len(self.dl)


@dataclass(frozen=True)
class RatePoint:
    dl_weighted: float
    ul_weighted: float

    def as_tuple(self):
        return (self.dl_weighted, self.ul_weighted)


def dl_gains(eff_dl, precoders):
    """|h_k^T w_i|^2 arranged as (k, i); precoders are rows of W."""
    return np.abs(eff_dl @ precoders.T) ** 2


def ul_gains(eff_ul, combiners):
    """|v_k^H h_i|^2 arranged as (k, i); combiners are rows of V."""
    return np.abs(combiners.conj() @ eff_ul.T) ** 2


def sinr_dl_all(eff_dl, precoders, noise_dl):
    g = dl_gains(eff_dl, precoders)
    sig = np.diag(g).copy()
    return sig / (noise_dl + g.sum(axis=1) - sig)


def sinr_ul_all(eff_ul, combiners, powers, noise_ul):
    g = ul_gains(eff_ul, combiners) * powers[None, :]
    sig = np.diag(g).copy()
    vnorm2 = np.sum(np.abs(combiners) ** 2, axis=1)
    return sig / (noise_ul * vnorm2 + g.sum(axis=1) - sig)


def sinr_dl(k, eff_dl, precoders, noise_dl):
    """Downlink SINR of user k; channels pair with precoders by plain transpose."""
    return float(sinr_dl_all(eff_dl, precoders, noise_dl)[k])


def sinr_ul(k, eff_ul, combiners, powers, noise_ul):
    return float(sinr_ul_all(eff_ul, combiners, np.asarray(powers, dtype=float), noise_ul)[k])


def wsr(weights, sinrs):
    """Weighted sum of log2(1 + SINR), without the time/band share."""
    return float(np.dot(weights, np.log2(1 + np.asarray(sinrs))))


def weighted_rate_point(params: DuplexParams, weights: Weights, dl_sinrs, ul_sinrs) -> RatePoint:
    return RatePoint(params.alpha * wsr(weights.dl, dl_sinrs),
                     (1 - params.alpha) * wsr(weights.ul, ul_sinrs))


def wsp_objective(params: DuplexParams, weights: Weights, dl_sinrs, ul_sinrs) -> float:
    return (params.alpha * params.beta * wsr(weights.dl, dl_sinrs)
            + (1 - params.alpha) * (1 - params.beta) * wsr(weights.ul, ul_sinrs))
