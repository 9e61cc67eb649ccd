"""중앙 차분(central difference) 기반 그래디언트 검증 도구"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from core.errors import InvalidArgumentError, NonDeterministicError
from core.grad.params import ParamSet
from core.grad.tensor import Tensor, backward


def grad_check(
    forward: Callable[[], Tensor],
    params: ParamSet,
    eps: float = 1e-5,
    max_coords_per_param: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    floor: float = 1e-4,
) -> float:
    """해석적 그래디언트와 중앙 차분 근사값의 최대 상대 오차를 반환합니다.

    상대 오차는 |a - n| / max(|a|, |n|, floor) 입니다.

    Args:
        forward (Callable[[], Tensor]): 파라미터로부터 스칼라 손실을 만드는 결정적 클로저.
        params (ParamSet): 검사할 파라미터 (제자리에서 잠시 흔든 뒤 복원).
        eps (float): 차분 간격. 0 이하이면 오류.
        max_coords_per_param (Optional[int]): 파라미터별 검사 좌표 수 상한 (None 이면 전부).
        rng (Optional[np.random.Generator]): 좌표 샘플링용 난수 생성기.
        floor (float): 상대 오차 분모의 하한.

    Returns:
        float: 최대 상대 오차.
    """
    if eps <= 0.0:
        raise InvalidArgumentError(f"eps 는 양수여야 합니다: {eps}")

    baseline = forward().item()
    if forward().item() != baseline:
        raise NonDeterministicError("forward 클로저가 동일 파라미터에서 서로 다른 값을 반환합니다")

    analytic = backward(forward(), params)
    rng = rng if rng is not None else np.random.default_rng(0)

    worst = 0.0
    for name, tensor in params.items():
        flat = tensor.data.reshape(-1)
        size = flat.size
        if max_coords_per_param is None or size <= max_coords_per_param:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=max_coords_per_param, replace=False)

        grad_flat = analytic[name].reshape(-1)
        for idx in coords:
            original = flat[idx]
            flat[idx] = original + eps
            plus = forward().item()
            flat[idx] = original - eps
            minus = forward().item()
            flat[idx] = original

            numeric = (plus - minus) / (2.0 * eps)
            exact = grad_flat[idx]
            denom = max(abs(exact), abs(numeric), floor)
            worst = max(worst, abs(exact - numeric) / denom)

    return worst
