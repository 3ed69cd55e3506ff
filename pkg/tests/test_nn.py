import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from convsarc.errors import DomainError, NumericError, ShapeError
from convsarc.nn import (LSTMCellParams, LSTMState, cross_entropy,
                         dropout_mask, finite_diff_grad, lstm_run, lstm_step,
                         mlp_tanh, new_rng, sgd_step, sigmoid, softmax)


def rand_cell(input_dim, hidden_dim, seed=0, scale=0.5):
    rng = new_rng(seed)
    t = LSTMCellParams.zeros(input_dim, hidden_dim).tensors()
    return LSTMCellParams.from_tensors(
        {k: rng.uniform(-scale, scale, v.shape) for k, v in t.items()})


# ---------------------------------------------------------------- lstm_step

def test_lstm_step_all_zero():
    p = LSTMCellParams.zeros(3, 2)
    out = lstm_step(p, np.zeros(3), LSTMState.zeros(2))
    # sigmoid(0)=0.5 and tanh(0)=0 force both outputs to zero
    assert np.allclose(out.h, 0.0)
    assert np.allclose(out.c, 0.0)


def test_lstm_step_saturated_forget_gate_wipes_memory():
    p = LSTMCellParams.zeros(1, 1)
    p.b_i[:] = 100.0
    p.b_o[:] = 100.0
    p.b_f[:] = -100.0
    out = lstm_step(p, np.zeros(1), LSTMState(np.zeros(1), np.array([5.0])))
    assert abs(out.c[0]) < 1e-12
    assert abs(out.h[0]) < 1e-12


def test_lstm_step_matches_independent_gate_equations():
    # independent re-implementation of the four gate equations
    p = rand_cell(3, 2, seed=0)
    rng = new_rng(1)
    x = rng.uniform(-1, 1, 3)
    h_prev = rng.uniform(-1, 1, 2)
    c_prev = rng.uniform(-1, 1, 2)

    i = 1 / (1 + np.exp(-(p.W_i @ x + p.U_i @ h_prev + p.b_i)))
    f = 1 / (1 + np.exp(-(p.W_f @ x + p.U_f @ h_prev + p.b_f)))
    o = 1 / (1 + np.exp(-(p.W_o @ x + p.U_o @ h_prev + p.b_o)))
    g = np.tanh(p.W_g @ x + p.U_g @ h_prev + p.b_g)
    c_expect = f * c_prev + i * g
    h_expect = o * np.tanh(c_expect)

    out = lstm_step(p, x, LSTMState(h_prev, c_prev))
    assert np.allclose(out.c, c_expect, atol=1e-12, rtol=0)
    assert np.allclose(out.h, h_expect, atol=1e-12, rtol=0)


def test_lstm_step_shape_error_names_tensor():
    p = LSTMCellParams.zeros(3, 2)
    with pytest.raises(ShapeError, match="x"):
        lstm_step(p, np.zeros(4), LSTMState.zeros(2))
    with pytest.raises(ShapeError, match="prev.h"):
        lstm_step(p, np.zeros(3), LSTMState(np.zeros(5), np.zeros(2)))


@given(seed=st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_lstm_step_hidden_state_strictly_bounded(seed):
    rng = new_rng(seed)
    p = rand_cell(4, 3, seed=seed, scale=2.0)
    out = lstm_step(p, rng.uniform(-5, 5, 4),
                    LSTMState(rng.uniform(-1, 1, 3), rng.uniform(-3, 3, 3)))
    assert np.all(np.abs(out.h) < 1.0)
    assert np.all(np.isfinite(out.c))


# ----------------------------------------------------------------- lstm_run

def test_lstm_run_empty_sequence_returns_init():
    p = rand_cell(3, 2)
    init = LSTMState(np.array([0.1, -0.2]), np.array([0.3, 0.4]))
    hs, final = lstm_run(p, [], init)
    assert hs == []
    assert final is init


def test_lstm_run_single_input_equals_step():
    p = rand_cell(3, 2)
    x = new_rng(2).uniform(-1, 1, 3)
    hs, final = lstm_run(p, [x])
    step = lstm_step(p, x, LSTMState.zeros(2))
    assert len(hs) == 1
    assert np.array_equal(hs[0], step.h)
    assert np.array_equal(final.c, step.c)


def test_lstm_run_zero_params_all_zero_states():
    p = LSTMCellParams.zeros(3, 2)
    hs, final = lstm_run(p, [np.ones(3)] * 3)
    assert all(np.allclose(h, 0.0) for h in hs)
    assert np.allclose(final.h, 0.0)


def test_lstm_run_reports_bad_step_index():
    p = LSTMCellParams.zeros(3, 2)
    with pytest.raises(ShapeError, match="step 1"):
        lstm_run(p, [np.zeros(3), np.zeros(4)])


# ----------------------------------------------------------------- mlp_tanh

def test_mlp_tanh_zero_params():
    assert np.allclose(mlp_tanh(np.zeros((2, 3)), np.zeros(2), np.ones(3)), 0.0)


def test_mlp_tanh_identity_matches_calculator():
    out = mlp_tanh(np.eye(1), np.zeros(1), np.array([0.5]))
    assert out[0] == pytest.approx(0.46211715726000974, abs=1e-12)


def test_mlp_tanh_saturates_inside_unit_interval():
    out = mlp_tanh(np.eye(2), np.zeros(2), np.array([0.0, 1000.0]))
    assert out[0] == 0.0
    assert out[1] == pytest.approx(1.0, abs=1e-12)
    assert out[1] < 1.0 or out[1] == pytest.approx(1.0)


def test_mlp_tanh_shape_error():
    with pytest.raises(ShapeError):
        mlp_tanh(np.zeros((2, 3)), np.zeros(2), np.zeros(4))


# ------------------------------------------------------------------ softmax

def test_softmax_single_score_is_one():
    assert np.array_equal(softmax([12.3]), [1.0])


def test_softmax_symmetry():
    assert np.allclose(softmax([0.0, 0.0]), [0.5, 0.5])


def test_softmax_two_scores_match_direct_computation():
    out = softmax([1.0, 2.0])
    assert out[0] == pytest.approx(0.26894, abs=1e-5)
    assert out[1] == pytest.approx(0.73106, abs=1e-5)


def test_softmax_empty_is_domain_error():
    with pytest.raises(DomainError):
        softmax([])


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=8),
       st.floats(-30, 30))
@settings(max_examples=100, deadline=None)
def test_softmax_normalized_and_shift_invariant(scores, shift):
    out = softmax(scores)
    assert np.all(out >= 0.0)
    assert abs(out.sum() - 1.0) <= 1e-12
    shifted = softmax([s + shift for s in scores])
    assert np.allclose(out, shifted, atol=1e-12)


def test_softmax_handles_large_scores():
    out = softmax([1000.0, 1000.0])
    assert np.allclose(out, [0.5, 0.5])


# ------------------------------------------------------------- cross_entropy

def test_cross_entropy_perfect_prediction():
    assert cross_entropy([1.0, 0.0], 0) == 0.0


def test_cross_entropy_even_split_is_ln2():
    assert cross_entropy([0.5, 0.5], 1) == pytest.approx(0.693147, abs=1e-6)


def test_cross_entropy_point_one():
    assert cross_entropy([0.9, 0.1], 1) == pytest.approx(2.302585, abs=1e-6)


def test_cross_entropy_probability_floor():
    assert cross_entropy([1.0, 0.0], 1) == pytest.approx(-math.log(1e-12))


def test_cross_entropy_bad_index():
    with pytest.raises(DomainError):
        cross_entropy([0.5, 0.5], 2)


# ----------------------------------------------------------------- sgd_step

def test_sgd_step_basic_arithmetic():
    out = sgd_step({"w": np.array([1.0])}, {"w": np.array([2.0])}, lr=0.1, l2=0.0)
    assert out["w"][0] == pytest.approx(0.8)


def test_sgd_step_pure_decay():
    out = sgd_step({"w": np.array([1.0])}, {"w": np.array([0.0])}, lr=0.1, l2=0.5)
    assert out["w"][0] == pytest.approx(0.95)


def test_sgd_step_identity_fixed_point():
    w = {"a": np.array([1.0, -2.0]), "b": np.array([[3.0]])}
    g = {"a": np.zeros(2), "b": np.zeros((1, 1))}
    out = sgd_step(w, g, lr=0.1, l2=0.0)
    for k in w:
        assert np.array_equal(out[k], w[k])


@given(st.floats(0.01, 10.0), st.floats(1e-4, 0.5))
@settings(max_examples=50, deadline=None)
def test_sgd_step_l2_strictly_shrinks_nonzero_weights(w, l2):
    out = sgd_step({"w": np.array([w])}, {"w": np.array([0.0])}, lr=0.1, l2=l2)
    assert 0.0 < out["w"][0] < w


def test_sgd_step_shape_mismatch():
    with pytest.raises(ShapeError, match="w"):
        sgd_step({"w": np.zeros(2)}, {"w": np.zeros(3)}, lr=0.1, l2=0.0)


# ------------------------------------------------------------- dropout_mask

def test_dropout_rate_zero_is_identity():
    assert np.array_equal(dropout_mask(5, 0.0, new_rng(0)), np.ones(5))


def test_dropout_half_rate_zero_fraction():
    mask = dropout_mask(10_000, 0.5, new_rng(42))
    zero_frac = np.mean(mask == 0.0)
    assert 0.48 <= zero_frac <= 0.52
    assert set(np.unique(mask)) <= {0.0, 2.0}


def test_dropout_deterministic_for_same_seed():
    a = dropout_mask(100, 0.3, new_rng(7))
    b = dropout_mask(100, 0.3, new_rng(7))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("rate", [-0.1, 1.0, 1.5])
def test_dropout_rejects_bad_rate(rate):
    with pytest.raises(DomainError):
        dropout_mask(10, rate, new_rng(0))


# --------------------------------------------------------- finite_diff_grad

def test_finite_diff_quadratic():
    grads = finite_diff_grad(lambda p: float(p["w"][0] ** 2),
                             {"w": np.array([3.0])}, epsilon=1e-5)
    assert grads["w"][0] == pytest.approx(6.0, abs=1e-6)


def test_finite_diff_constant_loss():
    grads = finite_diff_grad(lambda p: 1.25, {"w": np.zeros((2, 2))})
    assert np.array_equal(grads["w"], np.zeros((2, 2)))


def test_finite_diff_nonfinite_loss_names_coordinate():
    def loss(p):
        return float("nan") if p["w"][1] != 0.5 else 0.0

    with pytest.raises(NumericError, match=r"w\[1\]"):
        finite_diff_grad(loss, {"w": np.array([0.0, 0.5])})


def test_sigmoid_midpoint():
    assert sigmoid(np.array([0.0]))[0] == 0.5
