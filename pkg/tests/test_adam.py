"""Optimizer unit checks against a hand-rolled reference loop."""

import numpy as np
import pytest

from uqens.adam import init_state, optimizer_step


def test_first_step_size_equals_learning_rate():
    # Fresh state, unit gradient: m_hat = 1, v_hat = 1 -> step = lr/(1+eps).
    state = init_state(1, lr=0.1)
    params, state = optimizer_step(np.zeros(1), np.ones(1), state)
    assert params[0] == pytest.approx(-0.1, abs=1e-7)
    assert state.step == 1


def test_first_step_independent_of_gradient_scale():
    # First step is -lr * g/(|g| + eps): fixed size up to the eps floor.
    for g in (1e-6, 1.0, 1e6):
        state = init_state(1, lr=0.01)
        params, _ = optimizer_step(np.zeros(1), np.array([g]), state)
        assert params[0] == pytest.approx(-0.01 * g / (g + 1e-8), rel=1e-12)


def test_matches_reference_implementation():
    rng = np.random.default_rng(11)
    n = 7
    lr, b1, b2, eps = 0.03, 0.9, 0.999, 1e-8
    params = rng.standard_normal(n)
    state = init_state(n, lr=lr, beta1=b1, beta2=b2, eps=eps)

    ref_p = params.copy()
    ref_m = np.zeros(n)
    ref_v = np.zeros(n)
    for t in range(1, 11):
        grad = rng.standard_normal(n)
        params, state = optimizer_step(params, grad, state)
        ref_m = b1 * ref_m + (1 - b1) * grad
        ref_v = b2 * ref_v + (1 - b2) * grad**2
        ref_p = ref_p - lr * (ref_m / (1 - b1**t)) / (np.sqrt(ref_v / (1 - b2**t)) + eps)
        assert np.array_equal(params, ref_p), f"diverged from reference at step {t}"
        assert state.step == t


def test_state_is_not_mutated():
    state = init_state(3)
    m_before = state.m.copy()
    optimizer_step(np.zeros(3), np.ones(3), state)
    assert np.array_equal(state.m, m_before)
    assert state.step == 0


def test_shape_mismatch_rejected():
    state = init_state(3)
    with pytest.raises(ValueError, match="shape mismatch"):
        optimizer_step(np.zeros(3), np.zeros(2), state)
    with pytest.raises(ValueError, match="shape mismatch"):
        optimizer_step(np.zeros(2), np.zeros(2), state)


def test_converges_on_quadratic():
    state = init_state(1, lr=0.05)
    x = np.array([8.0])
    for _ in range(2000):
        grad = 2.0 * (x - 3.0)
        x, state = optimizer_step(x, grad, state)
    assert abs(x[0] - 3.0) < 1e-3
