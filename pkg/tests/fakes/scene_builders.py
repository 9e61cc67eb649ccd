"""테스트용 손으로 만든 씬/검출기"""
from typing import Optional, Sequence

import numpy as np

from core.domain.models import AgentPose, Detection, ObjectInstance, ParentProbTable, Scene
from core.ports.detector_port import DetectorPort

CELL = 0.25


def center(i: int) -> float:
    return (i + 0.5) * CELL


def obj(instance_id: int, name: str, i: float, j: float, z: float, size: float = 0.1, parent: bool = False) -> ObjectInstance:
    """셀 좌표 (i, j) 중심에 놓인 객체 (i, j 는 실수 허용)."""
    return ObjectInstance(instance_id, name, center(i), center(j), z, size, parent)


def corridor_scene(target_i: int = 9, width: int = 10, height: int = 5, blocked=()) -> Scene:
    """가운데 줄 (j=2) 끝에 카메라 높이(1.5 m)의 Mug 하나가 놓인 복도."""
    return Scene(
        scene_id="corridor",
        width=width,
        height=height,
        blocked=frozenset(blocked),
        objects=(obj(0, "Mug", target_i, 2, 1.5),),
    )


def toy_room() -> Scene:
    """5×5 방: CounterTop(0), Table(1), Sofa(2) 부모와 Mug(3) 목표."""
    return Scene(
        scene_id="toy",
        width=5,
        height=5,
        blocked=frozenset({(4, 2), (0, 4), (2, 0)}),
        objects=(
            obj(0, "CounterTop", 4, 2, 0.45, size=1.0, parent=True),
            obj(1, "Table", 0, 4, 0.375, size=0.9, parent=True),
            obj(2, "Sofa", 2, 0, 0.225, size=1.2, parent=True),
            obj(3, "Mug", 4, 3, 0.95),
        ),
        room_type="kitchen",
    )


def toy_parent_table() -> ParentProbTable:
    return ParentProbTable({"Mug": {"CounterTop": 0.4, "Table": 0.6}})


class ScriptedDetector(DetectorPort):
    """호출 순서대로 미리 정한 검출 목록을 돌려주는 검출기 (마지막 목록 반복)."""

    def __init__(self, script: Sequence[Sequence[Detection]]):
        self.script = [list(d) for d in script]
        self.calls = 0

    def detect(self, scene: Scene, pose: AgentPose, rng: Optional[np.random.Generator] = None) -> list[Detection]:
        index = min(self.calls, len(self.script) - 1)
        self.calls += 1
        return list(self.script[index])
