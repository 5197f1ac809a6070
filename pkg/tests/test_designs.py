import numpy as np
import pytest

from jointirs.channel import DuplexChannelSet, LinkChannels
from jointirs.designs import (BcdOptions, DesignKind, bcd_joint, dl_only, evaluate_solution,
                              fixed_downlink_design, fixed_uplink_design, individual_design,
                              initial_state, initial_state_from_theta, link_coefficients, slicing_designs)

from conftest import crandn, random_channels, random_phases, random_weights, unit_params


@pytest.mark.parametrize("alpha, beta, expected", [
    (0.5, 0.5, (0.5, 0.5)), (0.5, 1.0, (1.0, 0.0)), (0.5, 0.0, (0.0, 1.0)),
    (1.0, 0.0, (0.0, 1.0)), (0.0, 1.0, (1.0, 0.0)), (0.2, 0.5, (0.2, 0.8)),
])
def test_link_coefficients(alpha, beta, expected):
    assert link_coefficients(alpha, beta) == pytest.approx(expected)


def _instance(seed, k=2, m=4, n=16, duplex="fdd"):
    rng = np.random.default_rng(seed)
    ch = random_channels(rng, k, m, n, duplex, reflect_scale=0.5)
    return rng, ch, random_weights(rng, k)


def test_bcd_trace_nondecreasing():
    for seed in range(5):
        rng, ch, w = _instance(seed)
        params = unit_params(0.5, rng.uniform(0.2, 0.8))
        sol = bcd_joint(ch, params, w, initial_state(ch, params, rng))
        assert np.all(np.diff(sol.objective_trace) >= -1e-9)
        assert sol.objective_trace[-1] == pytest.approx(
            params.dl_coef * sol.dl_wsr + params.ul_coef * sol.ul_wsr)


def test_solution_is_feasible():
    rng, ch, w = _instance(1)
    params = unit_params(0.4, 0.6, p_dl=3.0, p_ul=0.5)
    sol = bcd_joint(ch, params, w, initial_state(ch, params, rng))
    assert np.allclose(np.abs(sol.theta), 1.0)
    assert np.sum(np.abs(sol.W) ** 2) <= 3.0 * (1 + 1e-9)
    assert np.all((sol.p >= 0) & (sol.p <= 0.5))
    assert np.allclose(np.linalg.norm(sol.V, axis=1), 1.0)
    assert evaluate_solution(ch, params, w, sol).as_tuple() == pytest.approx(sol.rate_point.as_tuple())


def test_fixed_downlink_is_downlink_only_run():
    rng, ch, w = _instance(2)
    params = unit_params(0.5, 0.3)
    init = initial_state(ch, params, rng)
    fixed = fixed_downlink_design(ch, params, w, init)
    direct = bcd_joint(ch, dl_only(params), w, init)
    assert fixed.kind is DesignKind.FIXED_DOWNLINK
    assert fixed.dl_wsr == pytest.approx(direct.dl_wsr, rel=1e-12)
    assert fixed.ul_wsr == pytest.approx(direct.ul_wsr, rel=1e-12)


def test_individual_dominates_joint_and_fixed():
    for seed in range(3):
        rng, ch, w = _instance(10 + seed, duplex="tdd")
        for beta in (0.0, 0.5, 1.0):
            params = unit_params(0.5, beta)
            init = initial_state_from_theta(ch, params, random_phases(rng, 16))
            joint = bcd_joint(ch, params, w, init)
            ind = individual_design(ch, params, w, joint)
            assert ind.dl_wsr >= joint.dl_wsr - 1e-9
            assert ind.ul_wsr >= joint.ul_wsr - 1e-9
            if beta == 1.0:
                fixed = fixed_downlink_design(ch, params, w, init)
                assert ind.ul_wsr >= fixed.ul_wsr - 1e-9
            if beta == 0.0:
                fixed = fixed_uplink_design(ch, params, w, init)
                assert ind.dl_wsr >= fixed.dl_wsr - 1e-9


def test_single_user_single_antenna_tdd_fixed_designs_agree():
    rng = np.random.default_rng(4)
    link = LinkChannels(crandn(rng, 1, 1), crandn(rng, 1, 4), crandn(rng, 1, 4))
    ch = DuplexChannelSet(link, link, 1.95, 1.95, "tdd")
    w = random_weights(rng, 1)
    params = unit_params(0.5, 0.5, p_dl=2.0, p_ul=0.5)
    opts = BcdOptions(eps_outer=1e-10)
    init = initial_state(ch, params, rng)
    joint = bcd_joint(ch, params, w, init, opts)
    ind = individual_design(ch, params, w, joint, opts)
    fdl = fixed_downlink_design(ch, params, w, init, opts)
    ful = fixed_uplink_design(ch, params, w, init, opts)
    assert fdl.ul_wsr == pytest.approx(ind.ul_wsr, rel=1e-6)
    assert ful.dl_wsr == pytest.approx(ind.dl_wsr, rel=1e-6)


def test_slicing_without_interference_matches_single_element_run():
    rng = np.random.default_rng(6)
    link = LinkChannels(crandn(rng, 1, 2), crandn(rng, 1, 2), crandn(rng, 2, 2))
    ch = DuplexChannelSet(link, link, 1.95, 1.95, "tdd")
    w = random_weights(rng, 1)
    params = unit_params(0.5, 0.5)
    init = initial_state(ch, params, rng)
    _, without = slicing_designs(ch, params, w, init)

    half = LinkChannels(link.direct, link.reflected[:, :1], link.bs_irs[:, :1])
    ch1 = DuplexChannelSet(half, half, 1.95, 1.95, "tdd")
    init1 = initial_state_from_theta(ch1, params, init.theta[:1])
    ref = bcd_joint(ch1, dl_only(params), w, init1)
    assert without.dl_wsr == pytest.approx(ref.dl_wsr, rel=1e-8)


def test_slicing_with_interference_is_feasible():
    rng, ch, w = _instance(7)
    params = unit_params(0.5, 0.5)
    with_i, without = slicing_designs(ch, params, w, initial_state(ch, params, rng))
    assert with_i.kind is DesignKind.SLICING_WITH_INTERFERENCE
    assert np.allclose(np.abs(with_i.theta), 1.0)
    assert np.sum(np.abs(with_i.W) ** 2) <= params.p_max_dl * (1 + 1e-9)
    assert np.all(with_i.p <= params.p_max_ul * (1 + 1e-12))
    assert evaluate_solution(ch, params, w, with_i).as_tuple() == pytest.approx(with_i.rate_point.as_tuple())
    assert evaluate_solution(ch, params, w, without).as_tuple() == pytest.approx(without.rate_point.as_tuple())


def test_slicing_needs_even_elements():
    rng, ch, w = _instance(0, n=5)
    params = unit_params()
    with pytest.raises(ValueError):
        slicing_designs(ch, params, w, initial_state(ch, params, rng))


def test_zero_forcing_bcd():
    rng, ch, w = _instance(3, k=2, m=4)
    params = unit_params(0.5, 0.5)
    sol = bcd_joint(ch, params, w, initial_state(ch, params, rng), BcdOptions(beamformer="zf"))
    g = np.abs(ch.dl.effective(sol.theta) @ sol.W.T)
    assert g[0, 1] / g[0, 0] < 1e-9 and g[1, 0] / g[1, 1] < 1e-9
    assert np.all(np.diff(sol.objective_trace[:-1]) >= -1e-9)
