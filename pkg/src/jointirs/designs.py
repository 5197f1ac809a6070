"""Block-coordinate ascent for the joint UL/DL IRS design and the alternate schemes.

All designs share :func:`bcd_joint`. Its link objectives are rescaled by a
positive constant so that the solver tolerances do not depend on the
time/band split (see :func:`link_coefficients`); the reported trace is the
unscaled weighted-sum objective in bit/s/Hz.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .downlink import DegenerateChannelError, mrt_precoders, wmmse_solve, zf_precoders
from .manifold import RcgOptions, precompute_terms, rcg_optimize
from .metrics import (DuplexParams, RatePoint, Weights, sinr_dl_all, sinr_ul_all,
                      weighted_rate_point, wsr)
from .uplink import fp_power_control_multistart, mmse_combiners, uplink_stage

log = logging.getLogger(__name__)


class DesignKind(str, enum.Enum):
    JOINT = "joint"
    INDIVIDUAL = "individual"
    FIXED_DOWNLINK = "fixed_downlink"
    FIXED_UPLINK = "fixed_uplink"
    SLICING_WITH_INTERFERENCE = "slicing_with_interference"
    SLICING_WITHOUT_INTERFERENCE = "slicing_without_interference"


@dataclass
class BcdOptions:
    eps_outer: float = 1e-4
    max_outer: int = 50
    tol_inner: float = 1e-6
    max_inner: int = 100
    beamformer: str = "wmmse"
    rcg: RcgOptions = field(default_factory=RcgOptions)

    @classmethod
    def from_config(cls, config) -> "BcdOptions":
        return cls(config.eps_outer, config.max_outer, config.tol_inner, config.max_inner,
                   config.beamformer, RcgOptions(max_iter=config.max_rcg))


@dataclass
class BlockState:
    theta: np.ndarray
    W: np.ndarray
    V: np.ndarray
    p: np.ndarray


@dataclass
class Solution:
    """Result of one design. ``theta_dl`` and ``theta_ul`` are the same array
    for single-configuration designs."""

    theta_dl: np.ndarray
    theta_ul: np.ndarray
    W: np.ndarray
    V: np.ndarray
    p: np.ndarray
    rate_point: RatePoint
    objective_trace: list
    dl_wsr: float
    ul_wsr: float
    kind: DesignKind = DesignKind.JOINT
    active_dl: np.ndarray | None = None
    active_ul: np.ndarray | None = None
    warnings: list = field(default_factory=list)
    iterations: int = 0  # accepted outer BCD iterations, summed over sub-runs

    @property
    def theta(self):
        if self.theta_dl is self.theta_ul:
            return self.theta_dl
        return self.theta_dl, self.theta_ul

    def state(self) -> BlockState:
        return BlockState(self.theta_dl, self.W, self.V, self.p)


def link_coefficients(alpha, beta):
    """DL/UL objective coefficients proportional to (alpha*beta, (1-alpha)*(1-beta)), summing to one.

    When both products vanish (alpha, beta) is (0, 1) or (1, 0); beta then
    decides which link the IRS serves.
    """
    a, b = alpha * beta, (1 - alpha) * (1 - beta)
    if a + b > 0:
        return a / (a + b), b / (a + b)
    return float(beta), 1.0 - float(beta)


def initial_state(channels, params: DuplexParams, rng) -> BlockState:
    n = channels.dl.num_elements
    theta = np.exp(2j * np.pi * rng.random(n))
    return initial_state_from_theta(channels, params, theta)


def initial_state_from_theta(channels, params: DuplexParams, theta) -> BlockState:
    p = np.full(channels.ul.num_users, params.p_max_ul)
    V = mmse_combiners(channels.ul.effective(theta), p, params.noise_ul)
    W = mrt_precoders(channels.dl.effective(theta), params.p_max_dl)
    return BlockState(np.asarray(theta, dtype=complex), W, V, p)


def _link_wsrs(channels, params, weights, state: BlockState):
    dl = wsr(weights.dl, sinr_dl_all(channels.dl.effective(state.theta), state.W, params.noise_dl))
    ul = wsr(weights.ul, sinr_ul_all(channels.ul.effective(state.theta), state.V, state.p, params.noise_ul))
    return dl, ul


def _downlink_block(eff_dl, weights, params, W, options):
    if options.beamformer == "zf":
        return zf_precoders(eff_dl, params.p_max_dl)
    return wmmse_solve(eff_dl, weights.dl, params.p_max_dl, params.noise_dl, W_init=W,
                       tol=options.tol_inner, max_iter=options.max_inner).W


def refresh_beamformers(channels, params, weights, state: BlockState, options: BcdOptions) -> BlockState:
    """Re-optimize V, p and then W for the frozen IRS configuration."""
    eff_ul = channels.ul.effective(state.theta)
    V, p = uplink_stage(eff_ul, weights.ul, params.p_max_ul, params.noise_ul,
                        p_init=state.p, V_init=state.V, tol=options.tol_inner)
    W = _downlink_block(channels.dl.effective(state.theta), weights, params, state.W, options)
    return BlockState(state.theta, W, V, p)


def bcd_joint(channels, params: DuplexParams, weights: Weights, init: BlockState,
              options: BcdOptions | None = None, polish: bool = True) -> Solution:
    """Joint IRS design: cycle power control, combiners, precoders and phases.

    Blocks whose link coefficient is zero are skipped inside the loop. With
    ``polish`` the beamformers of both links are re-optimized once for the
    final phases, which never lowers the objective.
    """
    options = options or BcdOptions()
    c_dl, c_ul = link_coefficients(params.alpha, params.beta)
    warnings = []

    def scaled(dl, ul):
        return c_dl * dl + c_ul * ul

    def wsp(dl, ul):
        return params.alpha * params.beta * dl + (1 - params.alpha) * (1 - params.beta) * ul

    state = BlockState(init.theta.copy(), init.W.copy(), init.V.copy(), init.p.copy())
    if options.beamformer == "zf":
        state.W = zf_precoders(channels.dl.effective(state.theta), params.p_max_dl)
    dl, ul = _link_wsrs(channels, params, weights, state)
    obj = scaled(dl, ul)
    trace = [wsp(dl, ul)]
    iterations = 0

    for _ in range(options.max_outer):
        theta, W, V, p = state.theta, state.W, state.V, state.p
        if c_ul > 0:
            eff_ul = channels.ul.effective(theta)
            fp = fp_power_control_multistart(eff_ul, V, weights.ul, params.p_max_ul, params.noise_ul,
                                             p_init=p, tol=options.tol_inner, max_iter=options.max_inner)
            if fp.degenerate:
                warnings.append("fp: degenerate uplink gains")
            p = fp.p
            V = mmse_combiners(eff_ul, p, params.noise_ul)
        if c_dl > 0:
            W = _downlink_block(channels.dl.effective(theta), weights, params, W, options)
        terms = precompute_terms(channels, W, V, p, weights, params.noise_dl, params.noise_ul, c_dl, c_ul)
        rcg = rcg_optimize(theta, terms, options.rcg)
        if rcg.stalled:
            warnings.append("rcg: line search stalled")
        theta = rcg.theta
        if options.beamformer == "zf" and c_dl > 0:
            W = zf_precoders(channels.dl.effective(theta), params.p_max_dl)
        new = BlockState(theta, W, V, p)
        new_dl, new_ul = _link_wsrs(channels, params, weights, new)
        new_obj = scaled(new_dl, new_ul)
        if new_obj < obj:
            # only reachable when a heuristic (ZF) block undoes the phase update
            break
        state, dl, ul = new, new_dl, new_ul
        trace.append(wsp(dl, ul))
        iterations += 1
        change = new_obj - obj
        obj = new_obj
        if change <= options.eps_outer * max(abs(obj), 1e-12):
            break

    if polish:
        state = refresh_beamformers(channels, params, weights, state, options)
        new_dl, new_ul = _link_wsrs(channels, params, weights, state)
        dl, ul = new_dl, new_ul
        trace.append(wsp(dl, ul))
    return _solution(channels, params, weights, state, trace, DesignKind.JOINT, warnings, iterations)


def _solution(channels, params, weights, state, trace, kind, warnings, iterations=0):
    dl, ul = _link_wsrs(channels, params, weights, state)
    point = RatePoint(params.alpha * dl, (1 - params.alpha) * ul)
    return Solution(state.theta, state.theta, state.W, state.V, state.p, point, trace, dl, ul,
                    kind, warnings=list(warnings), iterations=iterations)


def evaluate_solution(channels, params: DuplexParams, weights: Weights, sol: Solution) -> RatePoint:
    """Recompute the rate point of a solution from its phases and beamformers."""
    ch_dl = channels if sol.active_dl is None else channels.masked(sol.active_dl)
    ch_ul = channels if sol.active_ul is None else channels.masked(sol.active_ul)
    dl = sinr_dl_all(ch_dl.dl.effective(sol.theta_dl), sol.W, params.noise_dl)
    ul = sinr_ul_all(ch_ul.ul.effective(sol.theta_ul), sol.V, sol.p, params.noise_ul)
    return weighted_rate_point(params, weights, dl, ul)


def dl_only(params: DuplexParams) -> DuplexParams:
    return replace(params, beta=1.0)


def ul_only(params: DuplexParams) -> DuplexParams:
    return replace(params, beta=0.0)


def individual_design(channels, params, weights, joint_solution: Solution,
                      options: BcdOptions | None = None) -> Solution:
    """Separate DL and UL configurations, both warm-started from ``joint_solution``.

    Physically meaningful for TDD only; for FDD it serves as an upper bound.
    """
    init = joint_solution.state()
    dl_sol = bcd_joint(channels, dl_only(params), weights, init, options)
    ul_sol = bcd_joint(channels, ul_only(params), weights, init, options)
    point = RatePoint(params.alpha * dl_sol.dl_wsr, (1 - params.alpha) * ul_sol.ul_wsr)
    start = params.alpha * params.beta * joint_solution.dl_wsr + (1 - params.alpha) * (1 - params.beta) * joint_solution.ul_wsr
    end = params.alpha * params.beta * dl_sol.dl_wsr + (1 - params.alpha) * (1 - params.beta) * ul_sol.ul_wsr
    warnings = dl_sol.warnings + ul_sol.warnings
    return Solution(dl_sol.theta_dl, ul_sol.theta_ul, dl_sol.W, ul_sol.V, ul_sol.p, point,
                    [start, end], dl_sol.dl_wsr, ul_sol.ul_wsr, DesignKind.INDIVIDUAL, warnings=warnings,
                    iterations=dl_sol.iterations + ul_sol.iterations)


def fixed_downlink_design(channels, params, weights, init: BlockState,
                          options: BcdOptions | None = None) -> Solution:
    """IRS and precoders optimized for the downlink; the uplink then uses that IRS as is."""
    sol = bcd_joint(channels, dl_only(params), weights, init, options)
    return _relabel(sol, params, DesignKind.FIXED_DOWNLINK)


def fixed_uplink_design(channels, params, weights, init: BlockState,
                        options: BcdOptions | None = None) -> Solution:
    sol = bcd_joint(channels, ul_only(params), weights, init, options)
    return _relabel(sol, params, DesignKind.FIXED_UPLINK)


def _relabel(sol: Solution, params, kind) -> Solution:
    wsp = params.alpha * params.beta * sol.dl_wsr + (1 - params.alpha) * (1 - params.beta) * sol.ul_wsr
    return replace(sol, kind=kind, objective_trace=[wsp])


def slicing_designs(channels, params, weights, init: BlockState,
                    options: BcdOptions | None = None) -> tuple[Solution, Solution]:
    """Half of the IRS serves the downlink, the other half the uplink.

    Returns ``(with_interference, without_interference)``. The idealized
    variant ignores the reflections of the other half on each link; the
    realistic one re-optimizes all beamformers for the full configuration.
    """
    options = options or BcdOptions()
    n = channels.dl.num_elements
    if n % 2:
        raise ValueError("slicing needs an even number of IRS elements")
    active_dl = np.arange(n) < n // 2
    active_ul = ~active_dl
    dl_sol = bcd_joint(channels.masked(active_dl), dl_only(params), weights, init, options)
    ul_sol = bcd_joint(channels.masked(active_ul), ul_only(params), weights, init, options)
    warnings = dl_sol.warnings + ul_sol.warnings

    point = RatePoint(params.alpha * dl_sol.dl_wsr, (1 - params.alpha) * ul_sol.ul_wsr)
    without = Solution(dl_sol.theta_dl, ul_sol.theta_ul, dl_sol.W, ul_sol.V, ul_sol.p, point,
                       [point.dl_weighted * params.beta + point.ul_weighted * (1 - params.beta)],
                       dl_sol.dl_wsr, ul_sol.ul_wsr, DesignKind.SLICING_WITHOUT_INTERFERENCE,
                       active_dl=active_dl, active_ul=active_ul, warnings=list(warnings),
                       iterations=dl_sol.iterations + ul_sol.iterations)

    theta = np.where(active_dl, dl_sol.theta_dl, ul_sol.theta_ul)
    full = refresh_beamformers(channels, params, weights, BlockState(theta, dl_sol.W, ul_sol.V, ul_sol.p), options)
    with_sol = _solution(channels, params, weights, full, [], DesignKind.SLICING_WITH_INTERFERENCE, warnings,
                         dl_sol.iterations + ul_sol.iterations)
    with_sol.objective_trace = [with_sol.rate_point.dl_weighted * params.beta
                                + with_sol.rate_point.ul_weighted * (1 - params.beta)]
    return with_sol, without
