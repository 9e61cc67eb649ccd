"""
역전파(reverse-mode) 자동 미분 텐서

모든 텐서는 2차원 float64 행렬입니다. 스칼라는 1×1 로 표현합니다.
연산은 순수 함수이며, 입력 중 하나라도 그래디언트가 필요하면 TapeNode 를 기록합니다.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np

from core.errors import NonFiniteError, ShapeError

if TYPE_CHECKING:
    from core.grad.params import ParamSet

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass(frozen=True, eq=False)
class TapeNode:
    """연산 그래프의 노드.

    Attributes:
        op (str): 연산 종류.
        inputs (tuple[Tensor, ...]): 입력 텐서.
        backward_fn (BackwardFn): 출력 그래디언트를 받아 입력별 그래디언트를 반환.
    """
    op: str
    inputs: tuple["Tensor", ...]
    backward_fn: BackwardFn


class Tensor:
    """2차원 float64 텐서.

    Attributes:
        data (np.ndarray): 행 우선(row-major) 데이터.
        requires_grad (bool): 그래디언트 추적 여부.
        name (Optional[str]): 파라미터 이름 (디버깅용).
        node (Optional[TapeNode]): 이 텐서를 만든 연산 노드. 리프는 None.
    """

    __slots__ = ("data", "requires_grad", "name", "node")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: Optional[str] = None,
        node: Optional[TapeNode] = None,
    ):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ShapeError(f"2차원 텐서만 지원합니다: shape={arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"텐서에 NaN/Inf 값이 포함되어 있습니다 (op={node.op if node else 'leaf'}, name={name})")
        self.data = arr
        self.requires_grad = requires_grad
        self.name = name
        self.node = node

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def item(self) -> float:
        if self.shape != (1, 1):
            raise ShapeError(f"스칼라(1×1)가 아닙니다: shape={self.shape}")
        return float(self.data[0, 0])

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}, name={self.name})"

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __neg__(self) -> "Tensor":
        return scale(self, -1.0)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _result(op: str, out: np.ndarray, inputs: tuple[Tensor, ...], backward_fn: BackwardFn) -> Tensor:
    if any(t.requires_grad for t in inputs):
        return Tensor(out, requires_grad=True, node=TapeNode(op, inputs, backward_fn))
    return Tensor(out)


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"[{op}] 차원 불일치: {a.shape} vs {b.shape}")


# =========================================================================
# 원소별 연산
# =========================================================================

def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return _result("add", a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return _result("sub", a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    a_data, b_data = a.data, b.data
    return _result("mul", a_data * b_data, (a, b), lambda g: (g * b_data, g * a_data))


def scale(a: Tensor, factor: float) -> Tensor:
    return _result("scale", a.data * factor, (a,), lambda g: (g * factor,))


def square(a: Tensor) -> Tensor:
    a_data = a.data
    return _result("square", a_data * a_data, (a,), lambda g: (2.0 * g * a_data,))


def relu(a: Tensor) -> Tensor:
    mask = (a.data > 0.0).astype(np.float64)
    return _result("relu", a.data * mask, (a,), lambda g: (g * mask,))


def sigmoid(a: Tensor) -> Tensor:
    out = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return _result("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)
    return _result("tanh", out, (a,), lambda g: (g * (1.0 - out * out),))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return _result("exp", out, (a,), lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    a_data = a.data
    return _result("log", np.log(a_data), (a,), lambda g: (g / a_data,))


def absolute(a: Tensor) -> Tensor:
    sign = np.sign(a.data)
    return _result("abs", np.abs(a.data), (a,), lambda g: (g * sign,))


# =========================================================================
# 행렬 연산
# =========================================================================

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"[matmul] 차원 불일치: {a.shape} @ {b.shape}")
    a_data, b_data = a.data, b.data
    return _result("matmul", a_data @ b_data, (a, b), lambda g: (g @ b_data.T, a_data.T @ g))


def add_row(a: Tensor, row: Tensor) -> Tensor:
    """(r×c) 행렬의 모든 행에 (1×c) 행 벡터를 더합니다."""
    if row.shape[0] != 1 or row.shape[1] != a.shape[1]:
        raise ShapeError(f"[add_row] 차원 불일치: {a.shape} + {row.shape}")
    return _result("add_row", a.data + row.data, (a, row), lambda g: (g, g.sum(axis=0, keepdims=True)))


def transpose(a: Tensor) -> Tensor:
    return _result("transpose", a.data.T.copy(), (a,), lambda g: (g.T,))


def sum_all(a: Tensor) -> Tensor:
    shape = a.shape
    return _result("sum", np.array([[a.data.sum()]]), (a,), lambda g: (np.full(shape, g[0, 0]),))


def mean_rows(a: Tensor) -> Tensor:
    """행 평균 (r×c → 1×c)."""
    rows = a.shape[0]
    return _result(
        "mean_rows",
        a.data.mean(axis=0, keepdims=True),
        (a,),
        lambda g: (np.repeat(g / rows, rows, axis=0),),
    )


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"[concat] 행 수 불일치: {a.shape} | {b.shape}")
    split = a.shape[1]
    return _result(
        "concat",
        np.concatenate([a.data, b.data], axis=1),
        (a, b),
        lambda g: (g[:, :split], g[:, split:]),
    )


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    if not 0 <= start < stop <= a.shape[1]:
        raise ShapeError(f"[slice] 범위 오류: [{start}:{stop}] of {a.shape}")
    shape = a.shape

    def _backward(g: np.ndarray):
        full = np.zeros(shape)
        full[:, start:stop] = g
        return (full,)

    return _result("slice", a.data[:, start:stop].copy(), (a,), _backward)


def pick(a: Tensor, index: int) -> Tensor:
    """1×n 벡터의 index 번째 원소를 1×1 로 꺼냅니다."""
    if a.shape[0] != 1 or not 0 <= index < a.shape[1]:
        raise ShapeError(f"[pick] 범위 오류: index={index}, shape={a.shape}")
    shape = a.shape

    def _backward(g: np.ndarray):
        full = np.zeros(shape)
        full[0, index] = g[0, 0]
        return (full,)

    return _result("pick", a.data[:, index:index + 1].copy(), (a,), _backward)


# =========================================================================
# 역전파
# =========================================================================

def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        tensor, expanded = stack.pop()
        if expanded:
            order.append(tensor)
            continue
        if id(tensor) in visited:
            continue
        visited.add(id(tensor))
        stack.append((tensor, True))
        if tensor.node is not None:
            for inp in tensor.node.inputs:
                if id(inp) not in visited:
                    stack.append((inp, False))
    return order


def backward(loss: Tensor, params: "ParamSet") -> dict[str, np.ndarray]:
    """스칼라 손실에 대한 파라미터 그래디언트를 계산합니다.

    그래디언트는 호출마다 새 딕셔너리에 누적되므로 서로 다른 그래프의 역전파는 간섭하지 않습니다.

    Args:
        loss (Tensor): 기록된 연산으로 만들어진 1×1 텐서.
        params (ParamSet): 그래디언트를 받을 파라미터 집합.

    Returns:
        dict[str, np.ndarray]: 파라미터 이름별 그래디언트 (도달 불가 파라미터는 0).
    """
    if loss.shape != (1, 1):
        raise ShapeError(f"스칼라 손실만 역전파할 수 있습니다: shape={loss.shape}")

    grads: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
    for tensor in reversed(_topological_order(loss)):
        node = tensor.node
        upstream = grads.get(id(tensor))
        if node is None or upstream is None:
            continue
        for inp, inp_grad in zip(node.inputs, node.backward_fn(upstream)):
            if inp_grad is None or not inp.requires_grad:
                continue
            key = id(inp)
            grads[key] = grads[key] + inp_grad if key in grads else inp_grad

    return {
        name: grads[id(param)].copy() if id(param) in grads else np.zeros(param.shape)
        for name, param in params.items()
    }
