"""에피소드 (씬, 시작 자세, 목표) 균등 추출"""
from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from core.domain.models import EpisodeSpec, Scene
from core.errors import EpisodeSamplingError
from core.services.navigation_env_service import sample_start


class EpisodeSampler:
    """씬 → 시작 자세 → 씬에 존재하는 목표 순으로 균등하게 뽑습니다.

    Attributes:
        scenes (list[Scene]): 허용 목표가 하나 이상 있는 씬.
        allowed_targets (Optional[frozenset[str]]): 목표로 쓸 수 있는 클래스 (None 이면 전부).
    """

    def __init__(self, scenes: Sequence[Scene], allowed_targets: Optional[Iterable[str]] = None):
        self.allowed_targets = frozenset(allowed_targets) if allowed_targets is not None else None
        self._targets: dict[str, list[str]] = {}
        kept = []
        for scene in scenes:
            eligible = self.eligible_targets(scene)
            if eligible:
                self._targets[scene.scene_id] = eligible
                kept.append(scene)
        if not kept:
            raise EpisodeSamplingError(
                f"허용된 목표 클래스가 있는 씬이 없습니다 (scenes={len(scenes)}, "
                f"targets={sorted(self.allowed_targets) if self.allowed_targets is not None else 'all'})"
            )
        self.scenes = kept

    def eligible_targets(self, scene: Scene) -> list[str]:
        return [
            name for name in scene.target_classes()
            if self.allowed_targets is None or name in self.allowed_targets
        ]

    def sample(self, rng: np.random.Generator, target: Optional[str] = None) -> EpisodeSpec:
        """에피소드 하나를 뽑습니다. target 을 고정하면 그 목표가 있는 씬에서만 뽑습니다."""
        scenes = self.scenes if target is None else [s for s in self.scenes if target in self._targets[s.scene_id]]
        if not scenes:
            raise EpisodeSamplingError(f"목표 '{target}' 가 있는 씬이 없습니다")
        scene = scenes[int(rng.integers(len(scenes)))]
        start = sample_start(scene, rng)
        if target is None:
            candidates = self._targets[scene.scene_id]
            target = candidates[int(rng.integers(len(candidates)))]
        return EpisodeSpec(scene=scene, start=start, target=target)
