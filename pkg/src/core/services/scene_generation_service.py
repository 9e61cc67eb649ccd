"""
절차적 씬 생성 서비스

방 종류를 고른 뒤 그 방의 부모 객체를 빈 셀에 배치하고(최소 간격 유지, 셀 점유),
부모가 있는 목표 객체를 부모 근처(공출현 확률) 또는 균등 위치에 배치합니다.
"""
from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np

from core.config import GeneratorConfig
from core.domain.models import CELL_M, ClassCatalog, ObjectInstance, Scene
from core.errors import SceneGenerationError
from core.logger import logger

SeedLike = Union[int, np.random.SeedSequence]


class _Attempt(Exception):
    """한 번의 배치 시도 실패 (재시도 대상)."""


def _place_parents(
    rng: np.random.Generator,
    catalog: ClassCatalog,
    config: GeneratorConfig,
    room_type: str,
    width: int,
    height: int,
    blocked: set[tuple[int, int]],
) -> list[ObjectInstance]:
    low, high = config.parent_instances
    placed: list[ObjectInstance] = []
    for spec in catalog.parents_for_room(room_type):
        for _ in range(int(rng.integers(low, high + 1))):
            candidates = [
                (i, j)
                for i in range(width)
                for j in range(height)
                if (i, j) not in blocked
                and all(
                    math.hypot((i + 0.5) * CELL_M - p.x_w, (j + 0.5) * CELL_M - p.y_w) >= config.parent_min_separation_m
                    for p in placed
                )
            ]
            # 부모가 마지막 빈 셀을 차지하면 안 됨
            if len(candidates) == 0 or width * height - len(blocked) <= 1:
                raise _Attempt(f"부모 '{spec.name}' 를 놓을 셀이 없습니다")
            i, j = candidates[int(rng.integers(len(candidates)))]
            blocked.add((i, j))
            placed.append(ObjectInstance(
                instance_id=len(placed),
                class_name=spec.name,
                x_w=(i + 0.5) * CELL_M,
                y_w=(j + 0.5) * CELL_M,
                z_w=spec.height_m / 2.0,
                size_m=spec.size_m,
                is_parent=True,
            ))
    return placed


def generate_scene(
    catalog: ClassCatalog,
    config: GeneratorConfig,
    seed: SeedLike,
    scene_id: str = "scene_0000",
    split: str = "train",
    room_type: Optional[str] = None,
) -> Scene:
    """씬 하나를 생성합니다. 같은 seed 이면 같은 씬입니다.

    Args:
        catalog (ClassCatalog): 클래스 카탈로그.
        config (GeneratorConfig): 격자 크기, 부모 수, 배치 반경/확률 등.
        seed (SeedLike): 시드 (int 또는 SeedSequence).
        scene_id (str): 씬 id.
        split (str): 'train' 또는 'test'.
        room_type (Optional[str]): 방 종류 고정 (None 이면 균등 추출).

    Returns:
        Scene: 생성된 씬.

    Raises:
        SceneGenerationError: max_attempts 번 시도해도 배치할 수 없는 경우.
    """
    rng = np.random.default_rng(seed)
    rooms = config.room_types or catalog.room_types()
    last_reason = ""

    for _ in range(config.max_attempts):
        width = int(rng.integers(config.min_cells, config.max_cells + 1))
        height = int(rng.integers(config.min_cells, config.max_cells + 1))
        room = room_type or rooms[int(rng.integers(len(rooms)))]

        blocked = {
            (i, j)
            for i in range(width)
            for j in range(height)
            if config.obstacle_prob > 0.0 and rng.random() < config.obstacle_prob
        }
        try:
            parents = _place_parents(rng, catalog, config, room, width, height, blocked)
        except _Attempt as e:
            last_reason = str(e)
            continue

        free = [(i, j) for i in range(width) for j in range(height) if (i, j) not in blocked]
        if not free:
            last_reason = "빈 셀이 없습니다"
            continue

        room_w, room_h = width * CELL_M, height * CELL_M
        objects = list(parents)
        for spec in catalog.targets_for_room(room):
            anchors = [p for p in parents if p.class_name == spec.parent]
            if anchors and rng.random() < config.co_occurrence_prob:
                anchor = anchors[int(rng.integers(len(anchors)))]
                radius = config.child_radius_m * math.sqrt(rng.random())
                angle = rng.uniform(0.0, 2.0 * math.pi)
                x = min(max(anchor.x_w + radius * math.cos(angle), 0.0), room_w)
                y = min(max(anchor.y_w + radius * math.sin(angle), 0.0), room_h)
                z = catalog.get(anchor.class_name).height_m + spec.size_m / 2.0
            else:
                i, j = free[int(rng.integers(len(free)))]
                x = (i + rng.random()) * CELL_M
                y = (j + rng.random()) * CELL_M
                z = spec.size_m / 2.0
            objects.append(ObjectInstance(
                instance_id=len(objects),
                class_name=spec.name,
                x_w=float(x),
                y_w=float(y),
                z_w=float(z),
                size_m=spec.size_m,
                is_parent=False,
            ))

        return Scene(
            scene_id=scene_id,
            width=width,
            height=height,
            blocked=frozenset(blocked),
            objects=tuple(objects),
            split=split,
            room_type=room,
            cell_m=CELL_M,
        )

    raise SceneGenerationError(
        f"[{scene_id}] {config.max_attempts}번 시도했지만 씬을 생성하지 못했습니다 (마지막 원인: {last_reason})"
    )


class SceneGenerationService:
    """씬 묶음을 생성하고 train/test 로 나눕니다.

    Attributes:
        catalog (ClassCatalog): 클래스 카탈로그.
        config (GeneratorConfig): 생성 설정.
    """

    def __init__(self, catalog: ClassCatalog, config: GeneratorConfig):
        self.catalog = catalog
        self.config = config

    def split_counts(self, count: int) -> tuple[int, int]:
        n_train = int(round(count * self.config.train_ratio))
        if count >= 2:
            n_train = min(max(n_train, 1), count - 1)
        else:
            n_train = count
        return n_train, count - n_train

    def generate(self, count: int, seed: int) -> list[Scene]:
        """count 개의 씬을 생성합니다. 앞쪽 n_train 개가 train 입니다.

        Args:
            count (int): 씬 수.
            seed (int): 기준 시드. 씬별 시드는 SeedSequence 로 파생됩니다.

        Returns:
            list[Scene]: 생성된 씬.
        """
        if count < 1:
            raise ValueError(f"count 는 1 이상이어야 합니다: {count}")
        n_train, n_test = self.split_counts(count)
        children = np.random.SeedSequence(seed).spawn(count)
        scenes = [
            generate_scene(
                self.catalog,
                self.config,
                children[k],
                scene_id=f"scene_{k:04d}",
                split="train" if k < n_train else "test",
            )
            for k in range(count)
        ]
        logger.info(f"[Service:SceneGeneration] 씬 {count}개 생성 (train={n_train}, test={n_test}, seed={seed})")
        return scenes
