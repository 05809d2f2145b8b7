import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from csslearn.detector import EnergyDetectorConfig, draw_chi2, hard_decision, np_threshold
from csslearn.errors import DimensionError
from csslearn.fdr import FdrGate
from csslearn.fusion.baselines import majority_fuse
from csslearn.fusion.hedge import (
    WEIGHT_FLOOR,
    HedgeState,
    derive_expert_decisions,
    dhedge_update,
    hard_decide,
    hedge_combine,
    hedge_step,
    hedge_update,
    moment_match,
    soft_threshold,
)
from csslearn.models import (
    AgtLabel,
    ChannelTruth,
    CombiningMode,
    FdrPolicy,
    LearnerParams,
    MomentMatchedGamma,
    ObservationMatrix,
)


def agt_from(true_state):
    """AGT oracle without packet loss: idle decisions reveal the true state"""
    true_state = np.asarray(true_state)

    def observe(decision):
        agt = np.where(decision.idle, true_state, AgtLabel.ASSUMED_BUSY)
        return ChannelTruth(true_state, agt)
    return observe


def test_hedge_combine_examples():
    assert hedge_combine([0.25] * 4, [1, 1, 0, 0]) == pytest.approx(0.5)
    assert hedge_combine([1.0, 0.0, 0.0], [7.5, 3.0, 9.0]) == 7.5
    assert hedge_combine([0.468, 0.532], [1, 0]) == pytest.approx(0.468)


def test_hedge_combine_ignores_inactive():
    assert hedge_combine([0.5, 0.5, 0.0], [1.0, 0.0, 100.0], [True, True, False]) == pytest.approx(0.5)


@pytest.mark.parametrize("f,expected", [(0.49, 0), (0.51, 1), (0.50, 1)])
def test_hard_decide(f, expected):
    assert hard_decide(f) == expected


def test_moment_match_examples():
    g = moment_match([0.5, 0.5], 1.0, 4)
    assert (g.k, g.theta) == pytest.approx((4.0, 1.0))
    g = moment_match([1.0, 0.0], 3.0, 7)
    assert (g.k, g.theta) == pytest.approx((3.5, 6.0))
    g = moment_match(np.full(10, 0.1), 1.0, 20)
    assert (g.k, g.theta) == pytest.approx((100.0, 0.2))
    assert g.mean == pytest.approx(20.0)


def test_moment_match_empty_row():
    with pytest.raises(ValueError, match="empty weight row"):
        moment_match([0.0, 0.0], 1.0, 10)


@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(1e-3, 1.0)),
       st.floats(0.1, 10.0), st.integers(1, 100))
def test_moment_match_product(row, sigma2, n):
    p = row / row.sum()
    g = moment_match(p, sigma2, n)
    assert g.k * g.theta == pytest.approx(n * sigma2, rel=1e-9)


def test_soft_threshold_examples():
    assert soft_threshold(MomentMatchedGamma(1.0, 2.0), 0.05) == pytest.approx(5.99146, abs=1e-5)
    g = MomentMatchedGamma(12.0, 0.7)
    assert soft_threshold(g, 0.01) > soft_threshold(g, 0.10)


def test_soft_threshold_uniform_weights_calibrated(rng):
    p = np.full(10, 0.1)
    gamma = soft_threshold(moment_match(p, 1.0, 20), 0.05)
    combined = draw_chi2(20, rng, size=(10_000, 10)) @ p
    assert np.mean(combined >= gamma) == pytest.approx(0.05, abs=0.015)


def test_soft_threshold_random_rows_calibrated(rng):
    n, sigma2 = 10, 1.0
    for _ in range(10):
        p = rng.dirichlet(np.ones(10))
        gamma = soft_threshold(moment_match(p, sigma2, n), 0.05)
        combined = sigma2 * draw_chi2(n, rng, size=(10_000, 10)) @ p
        assert np.mean(combined >= gamma) == pytest.approx(0.05, abs=0.015)


def test_hedge_update_examples():
    assert hedge_update(1.0, 1, 0.88) == pytest.approx(0.88)
    assert hedge_update(0.37, 0, 0.88) == 0.37
    assert hedge_update(1.0, 10, 0.88) == pytest.approx(0.2785, abs=1e-4)


def test_dhedge_update_examples():
    assert dhedge_update(0.25, 0, 0.9, 0.5) == pytest.approx(0.5)
    assert dhedge_update(123.0, 1, 0.3, 0.0) == pytest.approx(0.3)
    assert dhedge_update(1e-50, 0, 0.3, 0.0) == pytest.approx(1.0)


@given(st.floats(1e-6, 1e3), st.integers(0, 1), st.floats(0.01, 1.0))
def test_dhedge_without_discount_is_hedge(w, loss, beta):
    assert dhedge_update(w, loss, beta, 1.0) == hedge_update(w, loss, beta)


def test_derive_expert_decisions():
    assert derive_expert_decisions(np.array([1.0, 2.0]), np.array([6.0, 6.0])).tolist() == [0, 0]
    assert derive_expert_decisions(np.array([3.0, 7.0]), np.array([6.0, 6.0])).tolist() == [0, 1]
    energies = np.array([0.5, 6.0, 12.0, 5.999])
    np.testing.assert_array_equal(derive_expert_decisions(energies, 6.0), hard_decision(energies, 6.0))


@pytest.mark.parametrize("num_detectors", range(1, 13))
def test_uniform_hard_hedge_is_majority_vote(num_detectors):
    p = np.full(num_detectors, 1.0 / num_detectors)
    for bits in itertools.product((0, 1), repeat=num_detectors):
        bits = np.array(bits)
        assert hard_decide(hedge_combine(p, bits)) == majority_fuse(bits)


def test_closed_form_weights_after_many_steps(rng):
    params = LearnerParams(beta=0.95, w0=1.0)
    state = HedgeState.initial(3, 5, params, CombiningMode.HARD)
    applied = np.zeros((3, 5), dtype=np.int64)
    for _ in range(10_000):
        loss = (rng.random((3, 5)) < 0.3).astype(np.int8)
        mask = rng.random((3, 5)) < 0.9
        state.apply_losses(loss, mask)
        applied += np.where(mask, loss, 0)
    expected = params.w0 * np.power(params.beta, applied.astype(float))
    assert np.array_equal(state.weights.weights, expected)
    np.testing.assert_array_equal(state.cumulative_loss, applied)


def test_all_idle_reports_leave_weights_unchanged(detector_cfg):
    params = LearnerParams(beta=0.88)
    state = HedgeState.initial(2, 4, params, CombiningMode.HARD)
    before = state.weights.weights.copy()
    obs = ObservationMatrix(np.zeros((2, 4)), CombiningMode.HARD, np.ones((2, 4), dtype=bool))
    decision, state = hedge_step(state, obs, agt_from([0, 0]), 1.0, detector_cfg)
    np.testing.assert_array_equal(decision.final, [0, 0])
    np.testing.assert_array_equal(state.weights.weights, before)


def test_persistent_liar_loses_weight(rng, detector_cfg):
    state = HedgeState.initial(1, 5, LearnerParams(beta=0.88), CombiningMode.HARD)
    liar_weights = [state.weights.normalized[0, 4]]
    for _ in range(200):
        truth = int(rng.random() < 0.5)
        bits = np.array([[truth] * 4 + [1 - truth]], dtype=float)
        obs = ObservationMatrix(bits, CombiningMode.HARD, np.ones((1, 5), dtype=bool))
        decision, state = hedge_step(state, obs, agt_from([truth]), 1.0, detector_cfg)
        assert decision.final[0] == truth
        liar_weights.append(state.weights.normalized[0, 4])
    assert all(b <= a for a, b in zip(liar_weights, liar_weights[1:]))
    assert liar_weights[-1] < 1e-3
    assert state.weights.normalized[0].sum() == pytest.approx(1.0, abs=1e-9)


def test_lower_loss_count_keeps_higher_weight(rng):
    state = HedgeState.initial(1, 2, LearnerParams(beta=0.9), CombiningMode.HARD)
    for _ in range(500):
        b_loss = int(rng.random() < 0.5)
        a_loss = b_loss if rng.random() < 0.5 else 0
        state.apply_losses(np.array([[a_loss, b_loss]]), np.ones((1, 2), dtype=bool))
        assert state.weights.weights[0, 0] >= state.weights.weights[0, 1]


def test_soft_step_normalization_and_thresholds(rng):
    detector = EnergyDetectorConfig(num_samples=10, noise_variance=1.0, pfa_target=0.05)
    zeta = np_threshold(detector)
    state = HedgeState.initial(3, 6, LearnerParams(beta=0.99), CombiningMode.SOFT)
    active = np.ones((3, 6), dtype=bool)
    active[2, :4] = False
    for _ in range(50):
        truth = (rng.random(3) < 0.5).astype(int)
        energies = draw_chi2(10, rng, size=(3, 6)) * (1.0 + 20.0 * truth[:, None])
        obs = ObservationMatrix(energies, CombiningMode.SOFT, active)
        decision, state = hedge_step(state, obs, agt_from(truth), zeta, detector)
        np.testing.assert_allclose(state.weights.normalized.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(state.weights.normalized[2, :4] == 0.0)
        busy = decision.soft >= decision.thresholds
        np.testing.assert_array_equal(decision.final, busy.astype(int))


def test_channel_without_detectors_is_busy(detector_cfg):
    state = HedgeState.initial(2, 3, LearnerParams(), CombiningMode.HARD)
    active = np.array([[True, True, True], [False, False, False]])
    obs = ObservationMatrix(np.zeros((2, 3)), CombiningMode.HARD, active)
    decision, _ = hedge_step(state, obs, agt_from([0, 0]), 1.0, detector_cfg)
    np.testing.assert_array_equal(decision.final, [0, 1])


def test_dimension_mismatch(detector_cfg):
    state = HedgeState.initial(2, 3, LearnerParams(), CombiningMode.HARD)
    obs = ObservationMatrix(np.zeros((2, 4)), CombiningMode.HARD, np.ones((2, 4), dtype=bool))
    with pytest.raises(DimensionError):
        hedge_step(state, obs, agt_from([0, 0]), 1.0, detector_cfg)


def test_discounted_weights_stay_positive_and_normalized(rng):
    state = HedgeState.initial(2, 4, LearnerParams(beta=0.5, discount=0.6, renorm_interval=100),
                               CombiningMode.SOFT)
    for _ in range(2_500):
        loss = (rng.random((2, 4)) < np.array([0.05, 0.05, 0.5, 0.9])).astype(np.int8)
        state.apply_losses(loss, np.ones((2, 4), dtype=bool))
    state.refresh(np.ones((2, 4), dtype=bool))
    assert np.all(state.weights.weights >= WEIGHT_FLOOR)
    assert np.all(np.isfinite(state.weights.weights))
    np.testing.assert_allclose(state.weights.normalized.sum(axis=1), 1.0, atol=1e-9)


def test_bh_gate_on_soft_decisions(detector_cfg):
    state = HedgeState.initial(4, 3, LearnerParams(beta=0.99), CombiningMode.SOFT)
    energies = np.array([[1.0, 2.0, 1.5], [200.0, 180.0, 220.0], [3.0, 2.0, 4.0], [150.0, 170.0, 90.0]])
    obs = ObservationMatrix(energies, CombiningMode.SOFT, np.ones((4, 3), dtype=bool))
    gate = FdrGate.build(FdrPolicy.BH, alpha=0.05, tau=0.02)
    decision, _ = hedge_step(state, obs, agt_from([0, 1, 0, 1]), np_threshold(detector_cfg),
                             detector_cfg, gate)
    np.testing.assert_array_equal(decision.final, [0, 1, 0, 1])
