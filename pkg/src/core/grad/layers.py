"""
TDANet 에 필요한 레이어 프리미티브

linear, softmax, log_softmax, lstm_step, dropout 을 제공합니다.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from core.errors import InvalidArgumentError, ShapeError
from core.grad import tensor as T
from core.grad.tensor import Tensor


class Mode(Enum):
    TRAIN = "train"
    EVAL = "eval"


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """out = xW + b (bias 는 모든 행에 broadcast).

    Args:
        x (Tensor): r×i 입력.
        weight (Tensor): i×o 가중치.
        bias (Tensor): 1×o 편향.

    Returns:
        Tensor: r×o 출력.
    """
    if x.shape[1] != weight.shape[0]:
        raise ShapeError(f"[linear] 입력 {x.shape} 과 가중치 {weight.shape} 의 차원이 맞지 않습니다")
    if bias.shape != (1, weight.shape[1]):
        raise ShapeError(f"[linear] 가중치 {weight.shape} 와 편향 {bias.shape} 의 차원이 맞지 않습니다")
    return T.add_row(T.matmul(x, weight), bias)


def softmax(v: Tensor) -> Tensor:
    """1×n 벡터의 softmax (최댓값 차감으로 수치 안정화)."""
    if v.shape[0] != 1 or v.shape[1] == 0:
        raise ShapeError(f"[softmax] 1×n (n>=1) 벡터가 필요합니다: shape={v.shape}")
    shifted = v.data - v.data.max()
    e = np.exp(shifted)
    out = e / e.sum()

    def _backward(g: np.ndarray):
        return (out * (g - (g * out).sum()),)

    return T._result("softmax", out, (v,), _backward)


def log_softmax(v: Tensor) -> Tensor:
    if v.shape[0] != 1 or v.shape[1] == 0:
        raise ShapeError(f"[log_softmax] 1×n (n>=1) 벡터가 필요합니다: shape={v.shape}")
    shifted = v.data - v.data.max()
    log_z = np.log(np.exp(shifted).sum())
    out = shifted - log_z
    probs = np.exp(out)

    def _backward(g: np.ndarray):
        return (g - probs * g.sum(),)

    return T._result("log_softmax", out, (v,), _backward)


def cross_entropy(logits: Tensor, target_index: int) -> Tensor:
    return T.scale(T.pick(log_softmax(logits), target_index), -1.0)


@dataclass(frozen=True)
class LstmWeights:
    """LSTM 셀 파라미터. 게이트 순서는 [input, forget, cell, output].

    Attributes:
        w_x (Tensor): i×4H 입력 가중치.
        w_h (Tensor): H×4H 순환 가중치.
        bias (Tensor): 1×4H 편향.
    """
    w_x: Tensor
    w_h: Tensor
    bias: Tensor

    @property
    def hidden_size(self) -> int:
        return self.w_h.shape[0]


def lstm_step(x: Tensor, h: Tensor, c: Tensor, weights: LstmWeights) -> tuple[Tensor, Tensor]:
    """표준 LSTM 셀 한 스텝.

    Returns:
        tuple[Tensor, Tensor]: (h', c')
    """
    hidden = weights.hidden_size
    if weights.w_h.shape != (hidden, 4 * hidden):
        raise ShapeError(f"[lstm] 순환 가중치 차원 오류: {weights.w_h.shape}")
    if h.shape != (1, hidden) or c.shape != (1, hidden):
        raise ShapeError(f"[lstm] 상태 차원 오류: h={h.shape}, c={c.shape}, H={hidden}")

    gates = T.add(linear(x, weights.w_x, weights.bias), T.matmul(h, weights.w_h))
    in_gate = T.sigmoid(T.slice_cols(gates, 0, hidden))
    forget_gate = T.sigmoid(T.slice_cols(gates, hidden, 2 * hidden))
    candidate = T.tanh(T.slice_cols(gates, 2 * hidden, 3 * hidden))
    out_gate = T.sigmoid(T.slice_cols(gates, 3 * hidden, 4 * hidden))

    c_next = T.add(T.mul(forget_gate, c), T.mul(in_gate, candidate))
    h_next = T.mul(out_gate, T.tanh(c_next))
    return h_next, c_next


def dropout(x: Tensor, rate: float, mode: Mode, rng: np.random.Generator | None) -> Tensor:
    """inverted dropout. EVAL 모드에서는 항등 함수입니다.

    Args:
        x (Tensor): 입력.
        rate (float): 0 이상 1 미만의 드롭 확률.
        mode (Mode): TRAIN 또는 EVAL.
        rng (np.random.Generator | None): TRAIN 모드에서 마스크를 뽑을 난수 생성기.
    """
    if not 0.0 <= rate < 1.0:
        raise InvalidArgumentError(f"dropout rate 는 [0, 1) 범위여야 합니다: {rate}")
    if mode is Mode.EVAL or rate == 0.0:
        return x
    if rng is None:
        raise InvalidArgumentError("TRAIN 모드 dropout 에는 rng 가 필요합니다")
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(np.float64) / (1.0 - rate)
    return T.mul(x, Tensor(mask))
