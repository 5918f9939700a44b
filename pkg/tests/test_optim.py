import numpy as np
import pytest

from doublecv.optim import AdamState, adam_step, sgd_step


def test_zero_grads_leave_params():
    p = [np.array([1.0, -2.0]), np.array(3.0)]
    new, state = adam_step(p, [np.zeros(2), np.array(0.0)], AdamState(), 0.1)
    for a, b in zip(p, new):
        np.testing.assert_array_equal(a, b)
    assert state.t == 1


def test_first_step_is_signed_lr():
    new, _ = adam_step([np.zeros(3)], [np.array([2.0, -0.5, 1e-3])], AdamState(), 0.01)
    np.testing.assert_allclose(new[0], [-0.01, 0.01, -0.01], rtol=1e-4)
    up, _ = adam_step([np.zeros(1)], [np.array([2.0])], AdamState(), 0.01, maximize=True)
    assert up[0][0] > 0


def test_inputs_not_mutated():
    p = [np.ones(2)]
    state = AdamState.zeros_like(p)
    adam_step(p, [np.ones(2)], state, 0.1)
    assert state.t == 0 and np.all(state.m[0] == 0)
    np.testing.assert_array_equal(p[0], 1.0)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        adam_step([np.zeros(2)], [np.zeros(3)], AdamState(), 0.1)


def test_sgd():
    np.testing.assert_array_equal(sgd_step([np.ones(2)], [np.array([1.0, 2.0])], 0.5)[0], [0.5, 0.0])
