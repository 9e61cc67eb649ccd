"""학습 파라미터 집합 (ParamSet)"""
from __future__ import annotations

from typing import Iterator, Mapping

import numpy as np

from core.errors import InvalidArgumentError, ShapeError
from core.grad.tensor import Tensor


class ParamSet:
    """등록 순서가 고정된 이름 있는 파라미터 텐서 집합.

    Attributes:
        version (int): 업데이트가 적용될 때마다 증가하는 버전 카운터.
    """

    def __init__(self):
        self._tensors: dict[str, Tensor] = {}
        self.version = 0

    def register(self, name: str, value: np.ndarray) -> Tensor:
        """파라미터를 등록합니다.

        Args:
            name (str): 고유 이름.
            value (np.ndarray): 초기값 (2차원).

        Returns:
            Tensor: 등록된 파라미터 텐서.
        """
        if name in self._tensors:
            raise InvalidArgumentError(f"이미 등록된 파라미터 이름입니다: {name}")
        tensor = Tensor(np.array(value, dtype=np.float64), requires_grad=True, name=name)
        self._tensors[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def names(self) -> list[str]:
        return list(self._tensors)

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self._tensors.items())

    def num_scalars(self) -> int:
        return sum(t.data.size for t in self._tensors.values())

    def snapshot(self) -> "ParamSet":
        """읽기 전용 사본을 만듭니다. 워커가 롤아웃 동안 공유해도 안전합니다."""
        copy = ParamSet()
        for name, tensor in self._tensors.items():
            frozen = copy.register(name, tensor.data)
            frozen.data.flags.writeable = False
        copy.version = self.version
        return copy

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self._tensors.items()}

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        """같은 이름/차원의 배열로 값을 덮어씁니다."""
        missing = set(self._tensors) ^ set(arrays)
        if missing:
            raise ShapeError(f"파라미터 이름 집합이 다릅니다: {sorted(missing)}")
        for name, tensor in self._tensors.items():
            value = np.asarray(arrays[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise ShapeError(f"[{name}] 차원 불일치: {tensor.shape} vs {value.shape}")
            tensor.data[...] = value
