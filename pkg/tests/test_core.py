import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from csslearn.core import expert_loss, normalize_weights
from csslearn.errors import DimensionError, NoActiveDetectorsError
from csslearn.models import (
    AgtLabel,
    Algorithm,
    ChannelTruth,
    CombiningMode,
    DecisionVector,
    FdrPolicy,
    LearnerFamily,
    LearnerParams,
    ObservationMatrix,
)


positive_rows = arrays(np.float64, st.integers(1, 12),
                       elements=st.floats(1e-3, 1e3, allow_nan=False, allow_infinity=False))


def test_normalize_uniform():
    np.testing.assert_allclose(normalize_weights([1, 1, 1, 1]), [0.25] * 4)


def test_normalize_two_weights():
    out = normalize_weights([0.88, 1.0])
    np.testing.assert_allclose(out, [0.88 / 1.88, 1.0 / 1.88], rtol=1e-12)


def test_normalize_masks_inactive():
    out = normalize_weights([1, 1, 1, 1], active=[True, True, False, False])
    np.testing.assert_allclose(out, [0.5, 0.5, 0.0, 0.0])


def test_normalize_all_inactive_raises():
    with pytest.raises(NoActiveDetectorsError, match="no active detectors for channel"):
        normalize_weights([1.0, 2.0], active=[False, False])


def test_normalize_rejects_nonpositive_active_weight():
    with pytest.raises(ValueError):
        normalize_weights([1.0, 0.0])


@given(positive_rows, st.floats(1e-3, 1e3))
def test_normalize_scale_invariant(row, c):
    np.testing.assert_allclose(normalize_weights(c * row), normalize_weights(row), rtol=1e-9, atol=1e-12)


@given(positive_rows)
def test_normalize_sums_to_one(row):
    assert abs(normalize_weights(row).sum() - 1.0) <= 1e-9


@pytest.mark.parametrize("decision,truth,expected", [(1, 1, 0), (0, 1, 1), (1, 0, 1), (0, 0, 0)])
def test_expert_loss(decision, truth, expected):
    assert expert_loss(decision, truth) == expected
    assert expert_loss(truth, decision) == expected


def test_expert_loss_elementwise():
    np.testing.assert_array_equal(expert_loss(np.array([0, 1, 1]), np.array([1, 1, 0])), [1, 0, 1])


def test_expert_loss_rejects_non_binary():
    with pytest.raises(ValueError):
        expert_loss(2, 1)


def test_observation_matrix_blanks_inactive():
    obs = ObservationMatrix(np.array([[1.0, 0.0], [1.0, 1.0]]), CombiningMode.HARD,
                            np.array([[True, False], [True, True]]))
    assert np.isnan(obs.values[0, 1])
    np.testing.assert_array_equal(obs.filled(0.0), [[1.0, 0.0], [1.0, 1.0]])


def test_observation_matrix_validates_values():
    with pytest.raises(ValueError):
        ObservationMatrix(np.array([[0.5]]), CombiningMode.HARD, np.array([[True]]))
    with pytest.raises(ValueError):
        ObservationMatrix(np.array([[-1.0]]), CombiningMode.SOFT, np.array([[True]]))
    # values outside the mask are not checked
    ObservationMatrix(np.array([[-1.0]]), CombiningMode.SOFT, np.array([[False]]))


def test_observation_matrix_shape_mismatch():
    with pytest.raises(DimensionError):
        ObservationMatrix(np.zeros((2, 3)), CombiningMode.SOFT, np.ones((3, 2), dtype=bool))


def test_channel_truth_agt_views():
    truth = ChannelTruth([0, 1, 1], [AgtLabel.IDLE, AgtLabel.BUSY, AgtLabel.ASSUMED_BUSY])
    np.testing.assert_array_equal(truth.agt_busy, [0, 1, 1])
    np.testing.assert_array_equal(truth.probed, [True, True, False])


def test_decision_vector_idle():
    decision = DecisionVector([0.2, 0.9], [0, 1], [0.5, 0.5])
    np.testing.assert_array_equal(decision.idle, [True, False])


def test_learner_params_ranges():
    with pytest.raises(ValueError):
        LearnerParams(beta=0.0)
    with pytest.raises(ValueError):
        LearnerParams(mu_deactivate=1.0)
    with pytest.raises(ValueError):
        LearnerParams(unknown=1)
    assert LearnerParams(discount=1.0).discount == 1.0


def test_algorithm_properties():
    assert Algorithm.HEDGE_HC.mode == CombiningMode.HARD
    assert Algorithm.DHEDGE_HC.mode == CombiningMode.HARD
    assert Algorithm.OR.family == LearnerFamily.BASELINE
    assert Algorithm.PSC_SW.family == LearnerFamily.PERCEPTRON
    assert Algorithm.PSC_SW.fdr_policy == FdrPolicy.SWITCH
    assert Algorithm.HSC_BH.fdr_policy == FdrPolicy.BH
    assert Algorithm.DPERC_SC.discounted
    assert not Algorithm.HEDGE_SC.discounted
