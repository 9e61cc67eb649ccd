import numpy as np
import pytest

from core.errors import NonFiniteError, ShapeError
from core.grad import ParamSet, backward
from core.grad import tensor as T
from core.grad.tensor import Tensor


def _naive_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], b.shape[1]))
    for r in range(a.shape[0]):
        for c in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[r, c] += a[r, k] * b[k, c]
    return out


def test_tensor_promotes_scalars_and_vectors_to_2d():
    assert Tensor(3.0).shape == (1, 1)
    assert Tensor([1.0, 2.0, 3.0]).shape == (1, 3)


def test_tensor_rejects_non_finite_and_3d():
    with pytest.raises(NonFiniteError):
        Tensor([1.0, np.nan])
    with pytest.raises(ShapeError):
        Tensor(np.zeros((2, 2, 2)))


def test_matmul_matches_naive_triple_loop():
    # Given
    rng = np.random.default_rng(7)
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 2))

    # When
    out = (Tensor(a) @ Tensor(b)).numpy()

    # Then
    np.testing.assert_allclose(out, _naive_matmul(a, b), atol=1e-12, rtol=0)


def test_matmul_shape_mismatch_names_both_shapes():
    with pytest.raises(ShapeError) as exc:
        Tensor(np.zeros((2, 3))) @ Tensor(np.zeros((2, 3)))
    assert "(2, 3)" in str(exc.value)


def test_backward_of_sum_gives_all_ones():
    # Given
    params = ParamSet()
    w = params.register("w", np.arange(6.0).reshape(2, 3))

    # When
    grads = backward(T.sum_all(w), params)

    # Then
    np.testing.assert_array_equal(grads["w"], np.ones((2, 3)))


def test_backward_rejects_non_scalar_loss():
    params = ParamSet()
    w = params.register("w", np.ones((2, 2)))
    with pytest.raises(ShapeError):
        backward(w * w, params)


def test_unreachable_param_gets_zero_gradient():
    params = ParamSet()
    w = params.register("w", np.ones((1, 3)))
    params.register("unused", np.ones((2, 2)))

    grads = backward(T.sum_all(T.square(w)), params)

    np.testing.assert_array_equal(grads["unused"], np.zeros((2, 2)))
    np.testing.assert_array_equal(grads["w"], 2.0 * np.ones((1, 3)))


def test_independent_backward_calls_do_not_interfere():
    # Given
    params = ParamSet()
    w = params.register("w", np.array([[0.5, -1.5]]))

    def loss_a():
        return T.sum_all(T.square(w))

    def loss_b():
        return T.sum_all(T.tanh(w))

    single_a = backward(loss_a(), params)
    single_b = backward(loss_b(), params)

    # When: 두 그래프를 번갈아 역전파
    graph_a, graph_b = loss_a(), loss_b()
    again_b = backward(graph_b, params)
    again_a = backward(graph_a, params)

    # Then
    np.testing.assert_array_equal(again_a["w"], single_a["w"])
    np.testing.assert_array_equal(again_b["w"], single_b["w"])


def test_shared_subexpression_accumulates_gradient():
    # loss = sum(w * w) 에서 w 는 두 번 사용된다
    params = ParamSet()
    w = params.register("w", np.array([[1.0, 2.0, -3.0]]))

    grads = backward(T.sum_all(w * w), params)

    np.testing.assert_allclose(grads["w"], 2.0 * w.numpy())


def test_associativity_equivalent_graphs_give_identical_gradients():
    # Given
    rng = np.random.default_rng(3)
    params = ParamSet()
    a = params.register("a", rng.normal(size=(2, 3)))
    b = params.register("b", rng.normal(size=(3, 4)))
    c = params.register("c", rng.normal(size=(4, 2)))

    # When
    left = backward(T.sum_all((a @ b) @ c), params)
    right = backward(T.sum_all(a @ (b @ c)), params)

    # Then
    for name in params:
        np.testing.assert_allclose(left[name], right[name], atol=1e-12, rtol=0)


def test_linear_regression_chain_matches_finite_differences():
    from core.grad import grad_check, linear

    # Given
    rng = np.random.default_rng(11)
    params = ParamSet()
    w = params.register("w", rng.normal(size=(3, 2)))
    b = params.register("b", rng.normal(size=(1, 2)))
    x = Tensor(rng.normal(size=(4, 3)))
    y = Tensor(rng.normal(size=(4, 2)))

    # When
    err = grad_check(lambda: T.sum_all(T.square(linear(x, w, b) - y)), params)

    # Then
    assert err <= 1e-6


def test_backward_handles_deep_chains_without_recursion_limit():
    params = ParamSet()
    w = params.register("w", np.array([[0.1]]))
    out = w
    for _ in range(5000):
        out = T.scale(out, 1.0)

    grads = backward(out, params)

    assert grads["w"][0, 0] == pytest.approx(1.0)
