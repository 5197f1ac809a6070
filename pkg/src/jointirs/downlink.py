"""Downlink precoding for a fixed IRS configuration: WMMSE, ZF and MRT.

Precoders are stored as rows of a (K, M) array ``W`` and pair with the
effective channel rows by plain transpose, i.e. user k sees h_k^T w_i.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .metrics import sinr_dl_all, wsr

log = logging.getLogger(__name__)


class DegenerateChannelError(ValueError):
    pass


@dataclass
class WmmseState:
    u: np.ndarray
    t: np.ndarray
    W: np.ndarray
    nu: float
    trace: list = field(default_factory=list)  # DL-WSR (bit/s/Hz) per iteration, trace[0] at W_init
    iterations: int = 0


def mrt_precoders(eff_dl, p_max):
    norms = np.linalg.norm(eff_dl, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return np.sqrt(p_max / eff_dl.shape[0]) * eff_dl.conj() / safe


def scale_to_power(W, p_max):
    total = float(np.sum(np.abs(W) ** 2))
    if total <= p_max or total == 0:
        return W
    return W * np.sqrt(p_max / total)


def _power_curve(eigvals, proj_sq):
    # proj_sq[m] = sum_k |(U^H B)_{m,k}|^2
    def power(nu):
        return float(np.sum(proj_sq / (eigvals + nu) ** 2))
    return power


def nu_bisection(eff_dl, weights, u, t, p_max, rtol=1e-13):
    """Lagrange multiplier of the sum-power constraint in the WMMSE precoder update.

    Returns ``(nu, W)`` where W are the precoders at that multiplier. The
    returned W never exceeds the power budget.
    """
    c = weights * u * np.abs(t) ** 2
    A = (eff_dl.conj().T * c) @ eff_dl
    B = (eff_dl.conj() * (weights * u * t)[:, None]).T  # columns eps_k u_k t_k h_k^*
    A = (A + A.conj().T) / 2
    d, U = np.linalg.eigh(A)
    d = np.clip(d, 0.0, None)
    Q = U.conj().T @ B
    proj_sq = np.sum(np.abs(Q) ** 2, axis=1)

    def precoders(nu):
        if nu == 0:
            # pseudo-inverse on the numerically singular part
            keep = d > 1e-12 * max(d.max(), np.finfo(float).tiny)
            inv = np.where(keep, 1 / np.where(keep, d, 1.0), 0.0)
        else:
            inv = 1 / (d + nu)
        return (U @ (inv[:, None] * Q)).T

    keep = d > 1e-12 * max(d.max(), np.finfo(float).tiny)
    p0 = float(np.sum(proj_sq[keep] / d[keep] ** 2))
    if p0 <= p_max:
        return 0.0, precoders(0.0)

    power = _power_curve(d, proj_sq)
    hi = np.sqrt(proj_sq.sum() / p_max) / 2 or np.finfo(float).tiny
    for _ in range(60):
        if power(hi) <= p_max:
            break
        hi *= 2
    else:
        raise FloatingPointError("could not bracket the WMMSE Lagrange multiplier")
    lo = 0.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if power(mid) > p_max:
            lo = mid
        else:
            hi = mid
        if p_max - power(hi) <= rtol * p_max:
            break
    return hi, precoders(hi)


def _wmmse_aux(eff_dl, W, noise):
    a = eff_dl @ W.T  # a[k, i] = h_k^T w_i
    g = np.abs(a) ** 2
    total = g.sum(axis=1) + noise
    sig = np.diag(g)
    u = total / (total - sig)
    t = np.diag(a) / total
    return u, t


def wmmse_solve(eff_dl, weights, p_max, noise, W_init=None, tol=1e-6, max_iter=100) -> WmmseState:
    """Weighted sum-rate precoding via the WMMSE fixed-point iteration.

    The iteration stops when the relative DL-WSR change falls below ``tol``.
    A step that would lower the DL-WSR is rejected and ends the loop, so the
    returned precoders are never worse than ``W_init``.
    """
    weights = np.asarray(weights, dtype=float)
    W = mrt_precoders(eff_dl, p_max) if W_init is None else scale_to_power(np.asarray(W_init, dtype=complex), p_max)
    rate = wsr(weights, sinr_dl_all(eff_dl, W, noise))
    state = WmmseState(*_wmmse_aux(eff_dl, W, noise), W=W, nu=0.0, trace=[rate])
    for it in range(max_iter):
        u, t = _wmmse_aux(eff_dl, W, noise)
        nu, W_new = nu_bisection(eff_dl, weights, u, t, p_max)
        new_rate = wsr(weights, sinr_dl_all(eff_dl, W_new, noise))
        if new_rate < rate:
            break
        W, state.u, state.t, state.nu = W_new, u, t, nu
        state.trace.append(new_rate)
        state.iterations = it + 1
        change = new_rate - rate
        rate = new_rate
        if change <= tol * max(abs(rate), 1e-12):
            break
    state.W = W
    return state


def zf_precoders(eff_dl, p_max):
    """Zero-forcing precoders with an equal per-user power split.

    Columns of the right pseudo-inverse of the (K, M) channel matrix, each
    normalised to power p_max / K.
    """
    k, m = eff_dl.shape
    if k > m:
        raise DegenerateChannelError("zero forcing needs K <= M")
    s = np.linalg.svd(eff_dl, compute_uv=False)
    if s[-1] <= 1e-10 * s[0] or s[0] == 0:
        raise DegenerateChannelError("effective channel matrix is rank deficient")
    pinv = eff_dl.conj().T @ np.linalg.inv(eff_dl @ eff_dl.conj().T)
    cols = pinv / np.linalg.norm(pinv, axis=0, keepdims=True)
    return np.sqrt(p_max / k) * cols.T
