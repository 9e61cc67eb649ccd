"""
부모 객체 사전 확률 Pr(t|p) 계산

학습 씬에서 목표 t 와 부모 p 의 평균 최소 거리 d̄(t, p) 를 구하고,
1 / (d̄ + ε) 를 함께 등장한 부모들에 대해 정규화합니다.
"""
from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

from core.domain.models import ClassCatalog, ParentProbTable, Scene
from core.errors import ParentTableError
from core.logger import logger

DISTANCE_FLOOR_M = 0.05


def _min_pair_distance(scene: Scene, target: str, parent: str) -> Optional[float]:
    targets = scene.instances_of(target)
    parents = scene.instances_of(parent)
    if not targets or not parents:
        return None
    return min(math.hypot(t.x_w - p.x_w, t.y_w - p.y_w) for t in targets for p in parents)


def parent_prob_table(
    scenes: Sequence[Scene],
    catalog: ClassCatalog,
    targets: Optional[Iterable[str]] = None,
) -> ParentProbTable:
    """학습 씬으로부터 Pr(t|p) 테이블을 만듭니다.

    Args:
        scenes (Sequence[Scene]): 학습 씬.
        catalog (ClassCatalog): 클래스 카탈로그.
        targets (Optional[Iterable[str]]): 계산할 목표 클래스 (None 이면 카탈로그의 모든 목표).

    Returns:
        ParentProbTable: 목표별로 합이 1 인 부모 분포.

    Raises:
        ParentTableError: 어떤 부모와도 함께 등장하지 않는 목표가 있는 경우.
    """
    wanted = list(targets) if targets is not None else [c.name for c in catalog.targets()]
    parents = [c.name for c in catalog.parents()]

    probs: dict[str, dict[str, float]] = {}
    orphans: list[str] = []
    for target in wanted:
        scores: dict[str, float] = {}
        for parent in parents:
            distances = [d for d in (_min_pair_distance(s, target, parent) for s in scenes) if d is not None]
            if distances:
                scores[parent] = 1.0 / (sum(distances) / len(distances) + DISTANCE_FLOOR_M)
        if not scores:
            orphans.append(target)
            continue
        total = sum(scores.values())
        probs[target] = {parent: score / total for parent, score in scores.items()}

    if orphans:
        raise ParentTableError(f"학습 씬에서 부모 객체와 함께 등장하지 않는 목표 클래스: {orphans}")

    logger.info(f"[Service:ParentPrior] Pr(t|p) 테이블 생성 (targets={len(probs)}, scenes={len(scenes)})")
    return ParentProbTable(probs)


def targets_in(scenes: Sequence[Scene]) -> list[str]:
    """씬들에 등장하는 목표 클래스 (첫 등장 순서)."""
    seen: dict[str, None] = {}
    for scene in scenes:
        for name in scene.target_classes():
            seen.setdefault(name, None)
    return list(seen)
