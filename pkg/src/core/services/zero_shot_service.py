"""
제로샷 분할 / 검출 마스크

목표 클래스를 seen/unseen 으로 나누고, 학습 중 unseen 클래스의 검출을 정책 입력에서 제거합니다.
각 unseen 클래스는 같은 프로토타입의 seen 클래스를 하나 이상 남겨 두므로 임베딩을 통한 전이가 가능합니다.
"""
from __future__ import annotations

import threading
from typing import Iterable, Optional, Sequence

import numpy as np

from core.domain.models import ClassCatalog, Detection, SplitSpec
from core.errors import InfeasibleSplitError, UnknownClassError
from core.logger import logger


def _check_prototype_sharing(catalog: ClassCatalog, seen: Sequence[str], unseen: Sequence[str]) -> None:
    seen_prototypes = {catalog.get(name).prototype for name in seen}
    orphaned = [name for name in unseen if catalog.get(name).prototype not in seen_prototypes]
    if orphaned:
        raise InfeasibleSplitError(f"같은 프로토타입의 seen 클래스가 없는 unseen 클래스: {orphaned}")


def zero_shot_split(
    catalog: ClassCatalog,
    unseen_count: int,
    seed: int,
    train_scenes: Sequence[str] = (),
    test_scenes: Sequence[str] = (),
) -> SplitSpec:
    """결정적인 seen/unseen 분할을 만듭니다.

    목표 클래스를 default_rng(seed) 로 섞은 뒤 앞에서부터, 자기 프로토타입에 seen 클래스가
    하나 이상 남는 경우에만 unseen 으로 옮깁니다.

    Args:
        catalog (ClassCatalog): 클래스 카탈로그.
        unseen_count (int): unseen 클래스 수.
        seed (int): 분할 시드.
        train_scenes (Sequence[str]): 학습 씬 id.
        test_scenes (Sequence[str]): 평가 씬 id.

    Returns:
        SplitSpec: 카탈로그 순서를 유지한 seen/unseen 목록.

    Raises:
        InfeasibleSplitError: 프로토타입 공유 조건으로 unseen_count 개를 고를 수 없는 경우.
    """
    targets = [c.name for c in catalog.targets()]
    if not 1 <= unseen_count < len(targets):
        raise InfeasibleSplitError(f"unseen 클래스 수가 범위를 벗어났습니다: {unseen_count} (목표 {len(targets)}개)")

    remaining: dict[str, int] = {}
    for name in targets:
        prototype = catalog.get(name).prototype
        remaining[prototype] = remaining.get(prototype, 0) + 1

    order = np.random.default_rng(seed).permutation(len(targets))
    unseen: set[str] = set()
    for index in order:
        if len(unseen) == unseen_count:
            break
        name = targets[int(index)]
        prototype = catalog.get(name).prototype
        if remaining[prototype] > 1:
            remaining[prototype] -= 1
            unseen.add(name)

    if len(unseen) < unseen_count:
        raise InfeasibleSplitError(
            f"프로토타입마다 seen 클래스를 하나 이상 남기면서 unseen {unseen_count}개를 고를 수 없습니다 "
            f"(최대 {len(unseen)}개)"
        )

    split = SplitSpec(
        seen=tuple(n for n in targets if n not in unseen),
        unseen=tuple(n for n in targets if n in unseen),
        train_scenes=tuple(train_scenes),
        test_scenes=tuple(test_scenes),
    )
    logger.info(f"[Service:ZeroShot] 분할 생성 (seed={seed}, seen={len(split.seen)}, unseen={list(split.unseen)})")
    return split


def explicit_split(
    catalog: ClassCatalog,
    seen: Iterable[str],
    unseen: Iterable[str],
    train_scenes: Sequence[str] = (),
    test_scenes: Sequence[str] = (),
) -> SplitSpec:
    """설정 파일에 적힌 seen/unseen 목록을 검증해 SplitSpec 으로 만듭니다.

    Raises:
        InfeasibleSplitError: 목표 클래스가 아니거나, 겹치거나, 프로토타입 공유 조건을 어긴 경우.
    """
    seen, unseen = list(seen), list(unseen)
    for name in seen + unseen:
        try:
            spec = catalog.get(name)
        except UnknownClassError as e:
            raise InfeasibleSplitError(f"분할에 카탈로그에 없는 클래스가 있습니다: {name}") from e
        if spec.is_parent:
            raise InfeasibleSplitError(f"부모 클래스는 분할할 수 없습니다: {name}")
    if not seen or not unseen:
        raise InfeasibleSplitError("seen 과 unseen 은 각각 하나 이상이어야 합니다")
    if set(seen) & set(unseen):
        raise InfeasibleSplitError(f"seen 과 unseen 이 겹칩니다: {sorted(set(seen) & set(unseen))}")
    _check_prototype_sharing(catalog, seen, unseen)
    return SplitSpec(tuple(seen), tuple(unseen), tuple(train_scenes), tuple(test_scenes))


class DetectionMask:
    """학습 관측에서 숨길 클래스의 검출을 제거하는 훅.

    `__call__` 은 NavigationEnvironment 의 detection_filter 로, `audit` 는 롤아웃의
    observation hook 으로 설치합니다. 정상적으로 설치되면 leaked 는 항상 0 입니다.

    Attributes:
        hidden (frozenset[str]): 숨길 클래스.
        removed (int): 제거한 검출 수.
        leaked (int): 마스크를 통과해 정책 입력에 도달한 숨김 클래스 검출 수.
    """

    def __init__(self, hidden: Iterable[str]):
        self.hidden = frozenset(hidden)
        self.removed = 0
        self.leaked = 0
        self._lock = threading.Lock()

    def __call__(self, detections: list[Detection]) -> list[Detection]:
        kept = [d for d in detections if d.class_name not in self.hidden]
        dropped = len(detections) - len(kept)
        if dropped:
            with self._lock:
                self.removed += dropped
        return kept

    def audit(self, detections: Sequence[Detection]) -> None:
        leaked = sum(d.class_name in self.hidden for d in detections)
        if leaked:
            with self._lock:
                self.leaked += leaked


def mask_for(split: Optional[SplitSpec]) -> Optional[DetectionMask]:
    return DetectionMask(split.unseen) if split is not None else None
