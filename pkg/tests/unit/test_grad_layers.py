import math

import numpy as np
import pytest
import typer

from commands.common import EXIT_RUNTIME, command_errors
from core.errors import InvalidArgumentError, NonDeterministicError, ShapeError, TdanetError
from core.grad import (
    LstmWeights,
    Mode,
    ParamSet,
    dropout,
    grad_check,
    linear,
    log_softmax,
    lstm_step,
    softmax,
)
from core.grad import tensor as T
from core.grad.layers import cross_entropy
from core.grad.tensor import Tensor


# ---------------------------------------------------------------------------
# linear
# ---------------------------------------------------------------------------

def test_linear_identity_like_case():
    out = linear(Tensor([[1.0, 0.0]]), Tensor([[2.0, 0.0], [0.0, 3.0]]), Tensor([[0.0, 0.0]]))
    np.testing.assert_array_equal(out.numpy(), [[2.0, 0.0]])


def test_linear_zero_input_passes_bias():
    rng = np.random.default_rng(0)
    out = linear(Tensor(np.zeros((3, 4))), Tensor(rng.normal(size=(4, 2))), Tensor([[1.0, 1.0]]))
    np.testing.assert_array_equal(out.numpy(), np.ones((3, 2)))


def test_linear_shape_mismatch_names_both_shapes():
    with pytest.raises(ShapeError) as exc:
        linear(Tensor(np.zeros((1, 3))), Tensor(np.zeros((4, 2))), Tensor(np.zeros((1, 2))))
    message = str(exc.value)
    assert "(1, 3)" in message and "(4, 2)" in message


# ---------------------------------------------------------------------------
# softmax
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "logits, expected",
    [
        ([0.0, 0.0], [0.5, 0.5]),
        ([42.0], [1.0]),
        ([math.log(3.0), 0.0], [0.75, 0.25]),
    ],
)
def test_softmax_known_values(logits, expected):
    np.testing.assert_allclose(softmax(Tensor(logits)).numpy()[0], expected, atol=1e-12)


def test_softmax_rejects_empty_vector():
    with pytest.raises(ShapeError):
        softmax(Tensor(np.zeros((1, 0))))


def test_softmax_sums_to_one_and_is_shift_invariant():
    rng = np.random.default_rng(5)
    for _ in range(200):
        v = rng.normal(scale=10.0, size=(1, int(rng.integers(1, 12))))
        out = softmax(Tensor(v)).numpy()
        shifted = softmax(Tensor(v + rng.normal(scale=50.0))).numpy()

        assert abs(out.sum() - 1.0) <= 1e-12
        np.testing.assert_allclose(out, shifted, atol=1e-12, rtol=0)


def test_softmax_is_stable_for_large_logits():
    out = softmax(Tensor([[1000.0, 1000.0]])).numpy()
    np.testing.assert_allclose(out, [[0.5, 0.5]])


def test_log_softmax_matches_log_of_softmax():
    v = Tensor([[0.3, -1.2, 2.5]])
    np.testing.assert_allclose(log_softmax(v).numpy(), np.log(softmax(v).numpy()), atol=1e-12)


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

def _lstm_params(rng, inputs: int, hidden: int, scale: float = 0.5) -> ParamSet:
    params = ParamSet()
    params.register("w_x", rng.uniform(-scale, scale, size=(inputs, 4 * hidden)))
    params.register("w_h", rng.uniform(-scale, scale, size=(hidden, 4 * hidden)))
    params.register("b", rng.uniform(-scale, scale, size=(1, 4 * hidden)))
    return params


def _weights(params: ParamSet) -> LstmWeights:
    return LstmWeights(params["w_x"], params["w_h"], params["b"])


def test_lstm_all_zero_gives_zero_state():
    params = ParamSet()
    params.register("w_x", np.zeros((3, 8)))
    params.register("w_h", np.zeros((2, 8)))
    params.register("b", np.zeros((1, 8)))

    h, c = lstm_step(Tensor(np.zeros((1, 3))), Tensor(np.zeros((1, 2))), Tensor(np.zeros((1, 2))), _weights(params))

    np.testing.assert_array_equal(h.numpy(), np.zeros((1, 2)))
    np.testing.assert_array_equal(c.numpy(), np.zeros((1, 2)))


def test_lstm_cell_state_bound():
    rng = np.random.default_rng(1)
    for _ in range(100):
        params = _lstm_params(rng, 3, 4, scale=3.0)
        c_prev = rng.normal(scale=2.0, size=(1, 4))
        _, c = lstm_step(Tensor(rng.normal(size=(1, 3))), Tensor(rng.normal(size=(1, 4))), Tensor(c_prev), _weights(params))
        assert np.all(np.abs(c.numpy()) <= np.abs(c_prev) + 1.0 + 1e-12)


def test_lstm_rejects_wrong_hidden_state_shape():
    rng = np.random.default_rng(2)
    params = _lstm_params(rng, 3, 4)
    with pytest.raises(ShapeError):
        lstm_step(Tensor(np.zeros((1, 3))), Tensor(np.zeros((1, 5))), Tensor(np.zeros((1, 4))), _weights(params))


def test_lstm_gradients_match_finite_differences():
    # Given
    rng = np.random.default_rng(9)
    params = _lstm_params(rng, 3, 4)
    x = Tensor(rng.normal(size=(1, 3)))
    h0 = Tensor(rng.normal(size=(1, 4)))
    c0 = Tensor(rng.normal(size=(1, 4)))
    proj_h = Tensor(rng.normal(size=(1, 4)))
    proj_c = Tensor(rng.normal(size=(1, 4)))

    def forward():
        h, c = lstm_step(x, h0, c0, _weights(params))
        return T.add(T.sum_all(h * proj_h), T.sum_all(c * proj_c))

    # When / Then
    assert grad_check(forward, params) <= 1e-4


# ---------------------------------------------------------------------------
# dropout
# ---------------------------------------------------------------------------

def test_dropout_eval_and_zero_rate_are_identity():
    x = Tensor(np.arange(6.0).reshape(2, 3))
    assert dropout(x, 0.5, Mode.EVAL, None) is x
    assert dropout(x, 0.0, Mode.TRAIN, np.random.default_rng(0)) is x


@pytest.mark.parametrize("rate", [-0.1, 1.0, 1.5])
def test_dropout_rejects_out_of_range_rate(rate):
    with pytest.raises(InvalidArgumentError):
        dropout(Tensor([[1.0]]), rate, Mode.EVAL, None)


def test_train_dropout_without_rng_is_rejected():
    with pytest.raises(InvalidArgumentError):
        dropout(Tensor([[1.0]]), 0.5, Mode.TRAIN, None)


def test_invalid_grad_argument_maps_to_runtime_exit_code():
    # Given: 허용 범위를 벗어난 dropout rate
    # When: CLI 명령의 예외 변환 구간에서 발생
    with pytest.raises(typer.Exit) as excinfo:
        with command_errors("train"):
            dropout(Tensor([[1.0]]), 1.5, Mode.EVAL, None)

    # Then: 도메인 예외로 처리되어 실행 오류 코드로 종료
    assert issubclass(InvalidArgumentError, TdanetError)
    assert isinstance(excinfo.value.__cause__, InvalidArgumentError)
    assert excinfo.value.exit_code == EXIT_RUNTIME


def test_dropout_statistics():
    # Given
    x = Tensor(np.ones((1, 100_000)))

    # When
    out = dropout(x, 0.5, Mode.TRAIN, np.random.default_rng(123)).numpy()

    # Then
    surviving = np.count_nonzero(out) / out.size
    assert abs(surviving - 0.5) <= 0.01
    assert abs(out.mean() - 1.0) <= 0.02


def test_dropout_backward_uses_recorded_mask():
    params = ParamSet()
    w = params.register("w", np.ones((1, 50)))
    out = dropout(w, 0.4, Mode.TRAIN, np.random.default_rng(4))

    from core.grad import backward
    grads = backward(T.sum_all(out), params)

    np.testing.assert_allclose(grads["w"], out.numpy())


# ---------------------------------------------------------------------------
# 레이어 프리미티브 그래디언트 (랜덤 시드 속성 테스트)
# ---------------------------------------------------------------------------

def _primitive_losses(rng):
    rows, cols = int(rng.integers(1, 4)), int(rng.integers(1, 5))
    params = ParamSet()
    x = params.register("x", rng.normal(size=(rows, cols)))
    w = params.register("w", rng.normal(size=(cols, 3)))
    b = params.register("b", rng.normal(size=(1, 3)))
    v = params.register("v", rng.normal(size=(1, 5)))
    pos = params.register("pos", rng.uniform(0.5, 2.0, size=(1, 4)))
    proj3 = Tensor(rng.normal(size=(rows, 3)))
    proj5 = Tensor(rng.normal(size=(1, 5)))
    proj4 = Tensor(rng.normal(size=(1, 4)))
    index = int(rng.integers(0, 5))

    losses = {
        "linear": lambda: T.sum_all(linear(x, w, b) * proj3),
        "softmax": lambda: T.sum_all(softmax(v) * proj5),
        "log_softmax": lambda: T.sum_all(log_softmax(v) * proj5),
        "cross_entropy": lambda: cross_entropy(v, index),
        "tanh_sigmoid": lambda: T.sum_all(T.tanh(v) * T.sigmoid(v) * proj5),
        "exp_log": lambda: T.sum_all(T.exp(T.scale(v, 0.3)) * proj5) + T.sum_all(T.log(pos) * proj4),
        "mean_rows": lambda: T.sum_all(T.mean_rows(linear(x, w, b)) * Tensor(proj3.numpy()[:1])),
        "concat_slice": lambda: T.sum_all(T.slice_cols(T.concat_cols(v, pos), 2, 7) * proj5),
        "transpose": lambda: T.sum_all(T.transpose(x) @ Tensor(proj3.numpy())),
    }
    return params, losses


@pytest.mark.parametrize("seed", range(100))
def test_layer_primitives_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    params, losses = _primitive_losses(rng)
    for name, forward in losses.items():
        err = grad_check(forward, params)
        assert err <= 1e-6, f"{name}: rel err {err}"


def test_grad_check_rejects_zero_eps():
    params = ParamSet()
    w = params.register("w", np.ones((1, 2)))
    with pytest.raises(InvalidArgumentError):
        grad_check(lambda: T.sum_all(w), params, eps=0.0)


def test_grad_check_detects_non_deterministic_closure():
    params = ParamSet()
    rng = np.random.default_rng(0)
    w = params.register("w", rng.uniform(1.0, 2.0, size=(1, 64)))

    def noisy():
        return T.sum_all(dropout(w, 0.5, Mode.TRAIN, rng))

    with pytest.raises(NonDeterministicError):
        grad_check(noisy, params)
