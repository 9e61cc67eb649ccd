"""
공유 Adam 옵티마이저

전역 그래디언트 노름 클리핑 후 Adam 업데이트를 적용합니다.
여러 워커가 같은 인스턴스(모멘트 상태)를 공유하며, 호출자는 단일 작성자 규약을 지켜야 합니다.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from core.errors import NonFiniteError
from core.grad.params import ParamSet


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_by_global_norm(
    grads: Mapping[str, np.ndarray], max_norm: float
) -> tuple[dict[str, np.ndarray], float]:
    """전역 L2 노름이 max_norm 을 넘으면 비율대로 줄입니다.

    Returns:
        tuple[dict[str, np.ndarray], float]: (클리핑된 그래디언트, 클리핑 전 노름)
    """
    norm = global_norm(grads)
    if norm > max_norm > 0.0:
        factor = max_norm / norm
        return {name: g * factor for name, g in grads.items()}, norm
    return {name: g.copy() for name, g in grads.items()}, norm


@dataclass
class AdamState:
    """Adam 1차/2차 모멘트 상태."""
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


class AdamOptimizer:
    """그래디언트 클리핑이 포함된 Adam.

    Attributes:
        lr (float): 학습률.
        beta1 (float): 1차 모멘트 감쇠.
        beta2 (float): 2차 모멘트 감쇠.
        eps (float): 분모 안정화 상수.
        clip (float): 전역 그래디언트 노름 상한.
        state (AdamState): 공유 모멘트 상태.
    """

    def __init__(
        self,
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        clip: float = 40.0,
        state: AdamState | None = None,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip = clip
        self.state = state if state is not None else AdamState()

    def step(self, params: ParamSet, grads: Mapping[str, np.ndarray]) -> int:
        """파라미터를 제자리에서 갱신하고 새 버전을 반환합니다.

        Args:
            params (ParamSet): 갱신할 공유 파라미터.
            grads (Mapping[str, np.ndarray]): 이름별 그래디언트.

        Returns:
            int: 증가된 파라미터 버전.

        Raises:
            NonFiniteError: 그래디언트에 NaN/Inf 가 있으면 아무것도 바꾸지 않고 발생.
        """
        for name in params:
            grad = grads.get(name)
            if grad is not None and not np.all(np.isfinite(grad)):
                raise NonFiniteError(f"[Optimizer] 파라미터 '{name}' 의 그래디언트가 유한하지 않아 업데이트를 거부합니다")

        clipped, _ = clip_by_global_norm(
            {name: grads[name] for name in params if name in grads}, self.clip
        )

        state = self.state
        state.step += 1
        bias1 = 1.0 - self.beta1 ** state.step
        bias2 = 1.0 - self.beta2 ** state.step
        for name, tensor in params.items():
            grad = clipped.get(name)
            if grad is None:
                continue
            m = state.m.setdefault(name, np.zeros_like(tensor.data))
            v = state.v.setdefault(name, np.zeros_like(tensor.data))
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            tensor.data -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)

        params.version += 1
        return params.version
