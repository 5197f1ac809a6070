"""Uplink receive combining (MMSE) and power control (fractional programming).

Combiners are stored as unit-norm rows of a (K, M) array ``V``; user k's
post-combining channel from user i is v_k^H h_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import sinr_ul_all, ul_gains, wsr


@dataclass
class UplinkState:
    V: np.ndarray
    p: np.ndarray
    gamma_aux: np.ndarray
    chi_aux: np.ndarray
    trace: list = field(default_factory=list)
    iterations: int = 0
    degenerate: bool = False


def mmse_combiners(eff_ul, powers, noise):
    m = eff_ul.shape[1]
    R = (eff_ul.T * powers) @ eff_ul.conj() + noise * np.eye(m)
    X = np.linalg.solve(R, eff_ul.T)
    norms = np.linalg.norm(X, axis=0, keepdims=True)
    return (X / np.where(norms > 0, norms, 1.0)).T


def _gamma(g, p, noise):
    sig = np.diag(g) * p
    return sig / (g @ p - sig + noise)


def _chi(g, p, gamma, weights, noise):
    return np.sqrt(weights * (1 + gamma) * np.diag(g) * p) / (g @ p + noise)


def _power(g, gamma, chi, weights, p_max):
    num = chi ** 2 * weights * (1 + gamma) * np.diag(g)
    den = (chi ** 2) @ g  # den[k] = sum_i chi_i^2 |v_i^H h_k|^2
    p = np.divide(num, den ** 2, out=np.zeros_like(num), where=den > 0)
    return np.minimum(p_max, p)


def fp_power_control(eff_ul, V, weights, p_max, noise, p_init=None, tol=1e-6, max_iter=100) -> UplinkState:
    """Uplink powers for fixed combiners by the quadratic-transform FP iteration.

    Each pass updates the SINR auxiliaries, then the quadratic-transform
    auxiliaries, then the clamped powers. A pass that would lower the UL-WSR
    is rejected and stops the loop.
    """
    weights = np.asarray(weights, dtype=float)
    k = eff_ul.shape[0]
    p = np.full(k, float(p_max)) if p_init is None else np.clip(np.asarray(p_init, dtype=float), 0, p_max)
    g = ul_gains(eff_ul, V)
    noise_k = noise * np.sum(np.abs(V) ** 2, axis=1)
    if not np.any(g > 0):
        gamma = np.zeros(k)
        return UplinkState(V, p, gamma, np.zeros(k), [0.0], 0, degenerate=True)

    rate = wsr(weights, _gamma(g, p, noise_k))
    state = UplinkState(V, p, None, None, [rate])
    for it in range(max_iter):
        gamma = _gamma(g, p, noise_k)
        chi = _chi(g, p, gamma, weights, noise_k)
        p_new = _power(g, gamma, chi, weights, p_max)
        new_rate = wsr(weights, _gamma(g, p_new, noise_k))
        if new_rate < rate:
            break
        p, state.chi_aux = p_new, chi
        state.trace.append(new_rate)
        state.iterations = it + 1
        change = new_rate - rate
        rate = new_rate
        if change <= tol * max(abs(rate), 1e-12):
            break
    state.p = p
    state.gamma_aux = _gamma(g, p, noise_k)
    if state.chi_aux is None:
        state.chi_aux = _chi(g, p, state.gamma_aux, weights, noise_k)
    return state


def fp_power_control_multistart(eff_ul, V, weights, p_max, noise, p_init=None, tol=1e-6,
                                max_iter=100) -> UplinkState:
    """FP power control from several starting points, keeping the best fixed point.

    Starts are ``p_init`` (or full power), full power, and each single user
    alone at full power. Under strong coupling the full-power corner can be
    a fixed point of the iteration while switching a user off is better.
    Ties keep the earliest start, so a warm start is never replaced by an
    equally good point.
    """
    k = eff_ul.shape[0]
    full = np.full(k, float(p_max))
    starts = [full if p_init is None else p_init, full]
    if k > 1:
        starts += [np.where(np.arange(k) == i, float(p_max), 0.0) for i in range(k)]
    best = None
    for p0 in starts:
        res = fp_power_control(eff_ul, V, weights, p_max, noise, p_init=p0, tol=tol, max_iter=max_iter)
        if best is None or res.trace[-1] > best.trace[-1]:
            best = res
    return best


def uplink_stage(eff_ul, weights, p_max, noise, p_init=None, V_init=None, tol=1e-6, max_iter=50):
    """Alternate FP power control and MMSE combining on fixed effective channels.

    Returns ``(V, p)``. Every half-step is nondecreasing in the UL-WSR.
    """
    weights = np.asarray(weights, dtype=float)
    p = np.full(eff_ul.shape[0], float(p_max)) if p_init is None else np.asarray(p_init, dtype=float)
    V = mmse_combiners(eff_ul, p, noise) if V_init is None else V_init
    rate = wsr(weights, sinr_ul_all(eff_ul, V, p, noise))
    for _ in range(max_iter):
        p = fp_power_control_multistart(eff_ul, V, weights, p_max, noise, p_init=p, tol=tol).p
        V = mmse_combiners(eff_ul, p, noise)
        new_rate = wsr(weights, sinr_ul_all(eff_ul, V, p, noise))
        change = new_rate - rate
        rate = new_rate
        if change <= tol * max(abs(rate), 1e-12):
            break
    return V, p
