"""IRS phase optimization on the product of unit circles.

For fixed precoders W, combiners V and powers p, the rate of every user is a
function of the phase vector theta through terms of the form
|theta^H lam_{k,i} + mu_{k,i}|^2. :func:`precompute_terms` builds those
coefficients once, and :func:`rcg_optimize` maximizes the weighted objective
with Riemannian conjugate gradient (Polak-Ribiere+, Armijo backtracking,
projection retraction and projection transport).

Natural logs are used throughout; the objective equals the UL/DL weighted
sum in bit/s/Hz times ln 2 when the link coefficients are alpha*beta and
(1 - alpha)*(1 - beta).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LinkTerms:
    """Coefficients of one link: lam[k, i, :] and mu[k, i] for receiver k and stream i."""

    lam: np.ndarray
    mu: np.ndarray
    noise: np.ndarray
    weights: np.ndarray
    coef: float


@dataclass(frozen=True)
class PrecomputedTerms:
    dl: LinkTerms
    ul: LinkTerms

    @property
    def links(self):
        return tuple(t for t in (self.dl, self.ul) if t.coef != 0)

    @property
    def num_elements(self) -> int:
        return self.dl.lam.shape[2]


def dl_terms(link, W, noise, weights, coef) -> LinkTerms:
    """Downlink terms: lam_{k,i} = diag(h_{r,k}^H) G^H w_i^*, mu_{k,i} = h_{d,k}^H w_i^*."""
    gw = link.bs_irs.conj().T @ W.conj().T  # (N, K) columns G^H w_i^*
    lam = link.reflected.conj()[:, None, :] * gw.T[None, :, :]
    mu = (link.direct @ W.T).conj()
    k = link.num_users
    return LinkTerms(lam, mu, np.broadcast_to(np.asarray(noise, float), (k,)).copy(),
                     np.asarray(weights, float), float(coef))


def ul_terms(link, V, p, noise, weights, coef) -> LinkTerms:
    """Uplink terms: lam_{k,i} = sqrt(p_i) diag(h_{r,i}^H) G^H v_k, mu_{k,i} = sqrt(p_i) h_{d,i}^H v_k."""
    sp = np.sqrt(np.asarray(p, dtype=float))
    gv = link.bs_irs.conj().T @ V.T  # (N, K) columns G^H v_k
    lam = (sp[:, None] * link.reflected.conj())[None, :, :] * gv.T[:, None, :]
    mu = ((link.direct.conj() @ V.T) * sp[:, None]).T
    k = link.num_users
    return LinkTerms(lam, mu, np.broadcast_to(np.asarray(noise, float), (k,)).copy(),
                     np.asarray(weights, float), float(coef))


def precompute_terms(channels, W, V, p, weights, noise_dl, noise_ul, dl_coef, ul_coef) -> PrecomputedTerms:
    """Build the DL and UL coefficient sets from raw channels and beamformers.

    ``weights`` is a :class:`~jointirs.metrics.Weights`; ``dl_coef`` and
    ``ul_coef`` scale the two link objectives.
    """
    return PrecomputedTerms(dl_terms(channels.dl, W, noise_dl, weights.dl, dl_coef),
                            ul_terms(channels.ul, V, p, noise_ul, weights.ul, ul_coef))


def _link_amplitudes(theta, t: LinkTerms):
    a = t.lam @ theta.conj() + t.mu  # a[k, i] = theta^H lam_{k,i} + mu_{k,i}
    g = a.real ** 2 + a.imag ** 2
    total = g.sum(axis=1) + t.noise
    interf = total - np.diag(g)
    return a, total, interf


def link_rates(theta, t: LinkTerms):
    """Per-user ln(1 + SINR) of one link."""
    _, total, interf = _link_amplitudes(theta, t)
    return np.log(total) - np.log(interf)


def j_mo(theta, terms: PrecomputedTerms) -> float:
    val = 0.0
    for t in terms.links:
        val += t.coef * float(np.dot(t.weights, link_rates(theta, t)))
    return val


def euclidean_gradient(theta, terms: PrecomputedTerms):
    """Gradient 2 dJ/d(theta^*) so that dJ = Re(grad^H dtheta)."""
    grad = np.zeros(terms.num_elements, dtype=complex)
    for t in terms.links:
        a, total, interf = _link_amplitudes(theta, t)
        k = len(total)
        scale = 1 / total[:, None] - (1 - np.eye(k)) / interf[:, None]
        coef = 2 * t.coef * t.weights[:, None] * scale * a.conj()
        grad += np.einsum("ki,kin->n", coef, t.lam)
    return grad


def tangent_project(theta, v):
    return v - (v * theta.conj()).real * theta


def riemannian_gradient(theta, egrad):
    return tangent_project(theta, egrad)


def retract(theta, step, direction):
    x = theta + step * direction
    mag = np.abs(x)
    ok = mag >= 1e-14
    return np.where(ok, x / np.where(ok, mag, 1.0), theta)


def transport(eta, theta_new):
    return tangent_project(theta_new, eta)


def _inner(a, b):
    return float(np.real(np.vdot(a, b)))


@dataclass
class RcgOptions:
    tol_grad: float | None = None  # default 1e-5 * sqrt(N)
    max_iter: int = 500
    armijo_c: float = 1e-4
    contraction: float = 0.5
    max_backtracks: int = 50


@dataclass
class RcgResult:
    theta: np.ndarray
    value: float
    trace: list = field(default_factory=list)
    iterations: int = 0
    stalled: bool = False


def _line_search(theta, value, direction, slope, terms, opts):
    # first trial moves the most-displaced element by one unit along the tangent
    step = 1.0 / float(np.max(np.abs(direction)))
    for _ in range(opts.max_backtracks):
        cand = retract(theta, step, direction)
        cand_val = j_mo(cand, terms)
        if cand_val >= value + opts.armijo_c * step * slope:
            return cand, cand_val
        step *= opts.contraction
    return None, None


def rcg_optimize(theta_init, terms: PrecomputedTerms, options: RcgOptions | None = None) -> RcgResult:
    """Ascend the phase objective from ``theta_init``; every accepted step increases it."""
    opts = options or RcgOptions()
    theta = np.asarray(theta_init, dtype=complex)
    if not np.allclose(np.abs(theta), 1.0, rtol=0, atol=1e-12):
        theta = theta / np.abs(theta)
    tol = opts.tol_grad if opts.tol_grad is not None else 1e-5 * np.sqrt(len(theta))
    value = j_mo(theta, terms)
    res = RcgResult(theta, value, [value])
    grad = riemannian_gradient(theta, euclidean_gradient(theta, terms))
    gnorm2 = _inner(grad, grad)
    direction = grad
    for it in range(opts.max_iter):
        if np.sqrt(gnorm2) < tol:
            break
        slope = _inner(grad, direction)
        if slope <= 0:
            direction, slope = grad, gnorm2
        new_theta, new_val = _line_search(theta, value, direction, slope, terms, opts)
        if new_theta is None and direction is not grad:
            direction, slope = grad, gnorm2
            new_theta, new_val = _line_search(theta, value, direction, slope, terms, opts)
        if new_theta is None:
            res.stalled = True
            break
        new_grad = riemannian_gradient(new_theta, euclidean_gradient(new_theta, terms))
        moved_grad = transport(grad, new_theta)
        tau = max(0.0, _inner(new_grad, new_grad - moved_grad) / gnorm2)
        direction = new_grad + tau * transport(direction, new_theta)
        theta, value, grad = new_theta, new_val, new_grad
        gnorm2 = _inner(grad, grad)
        res.trace.append(value)
        res.iterations = it + 1
    res.theta, res.value = theta, value
    return res
