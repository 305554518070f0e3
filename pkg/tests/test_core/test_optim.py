"""Tests for Adam updates"""

import numpy as np
import pytest

from sohot.core.numerics import ContractViolationError
from sohot.core.optim import AdamState, adam_update


def test_zero_gradient_leaves_params():
    """Test that a zero gradient on fresh moments changes nothing"""
    params = np.array([0.5, -1.0])
    adam_update(AdamState.fresh(2, 0.1), params, np.zeros(2))
    np.testing.assert_array_equal(params, [0.5, -1.0])


def test_first_step_is_learning_rate():
    """Test that the bias-corrected first step moves by lr"""
    params = np.array([1.0])
    state = AdamState.fresh(1, 0.1)
    adam_update(state, params, np.array([1.0]))
    assert params[0] == pytest.approx(0.9, abs=1e-6)
    assert state.step_count == 1


def test_opposite_steps_hand_trace():
    """Test two opposite-sign gradients against a hand trace"""
    params = np.array([0.0])
    state = AdamState.fresh(1, 0.1)
    adam_update(state, params, np.array([1.0]))
    adam_update(state, params, np.array([-1.0]))

    # step 2: m_hat = -0.01 / 0.19, v_hat = 1
    expected = -0.1 + 0.1 * 0.01 / 0.19
    assert params[0] == pytest.approx(expected, abs=1e-6)
    assert abs(params[0]) < 0.1


def test_deterministic():
    grads = [np.array([0.3, -0.2]), np.array([-0.1, 0.4]), np.array([0.0, 1.0])]
    results = []
    for _ in range(2):
        params = np.zeros(2)
        state = AdamState.fresh(2, 0.01)
        for g in grads:
            adam_update(state, params, g)
        results.append(params.copy())
    np.testing.assert_array_equal(results[0], results[1])


def test_lazy_moments():
    """Test that moments are sized on the first update"""
    state = AdamState(learning_rate=0.1)
    params = np.zeros(3)
    adam_update(state, params, np.ones(3))
    assert state.first_moment.shape == (3,)


def test_length_mismatch():
    with pytest.raises(ContractViolationError, match="Length mismatch"):
        adam_update(AdamState.fresh(2), np.zeros(3), np.zeros(3))


def test_invalid_hyperparameters():
    with pytest.raises(ValueError, match="learning_rate"):
        AdamState(learning_rate=0.0)
    with pytest.raises(ValueError, match="beta1 and beta2"):
        AdamState(beta1=1.0)
