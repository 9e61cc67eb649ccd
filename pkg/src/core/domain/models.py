from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping, Optional

import numpy as np

from core.errors import CatalogError, UnknownClassError

CELL_M = 0.25
CAMERA_HEIGHT_M = 1.5
VISIBILITY_DISTANCE_M = 1.5


class Action(IntEnum):
    """에이전트 행동. 순서는 정책 출력(logits) 인덱스와 동일하게 고정됩니다."""
    MOVE_AHEAD = 0
    ROTATE_LEFT = 1
    ROTATE_RIGHT = 2
    LOOK_UP = 3
    LOOK_DOWN = 4
    DONE = 5

    @property
    def label(self) -> str:
        return _ACTION_LABELS[self]


_ACTION_LABELS = {
    Action.MOVE_AHEAD: "MoveAhead",
    Action.ROTATE_LEFT: "RotateLeft",
    Action.ROTATE_RIGHT: "RotateRight",
    Action.LOOK_UP: "LookUp",
    Action.LOOK_DOWN: "LookDown",
    Action.DONE: "Done",
}

NUM_ACTIONS = len(Action)
MOTION_ACTIONS = (Action.MOVE_AHEAD, Action.ROTATE_LEFT, Action.ROTATE_RIGHT, Action.LOOK_UP, Action.LOOK_DOWN)


# =========================================================================
# 클래스 카탈로그 / 임베딩
# =========================================================================

@dataclass(frozen=True)
class ClassSpec:
    """객체 클래스 정의.

    Attributes:
        name (str): 클래스 이름 (CamelCase, 예: 'RemoteControl').
        prototype (str): 의미 클러스터 id. 합성 임베딩의 기준 벡터를 공유합니다.
        size_m (float): 물리적 크기 (m).
        height_m (float): 부모 객체의 윗면 높이 (m). 자식 클래스는 사용하지 않습니다.
        is_parent (bool): 부모 객체 여부.
        parent (Optional[str]): 자식 클래스가 주로 놓이는 부모 클래스.
        room_types (tuple[str, ...]): 부모 클래스가 배치되는 방 종류.
    """
    name: str
    prototype: str
    size_m: float
    height_m: float = 0.0
    is_parent: bool = False
    parent: Optional[str] = None
    room_types: tuple[str, ...] = ()


@dataclass(frozen=True)
class ClassCatalog:
    """클래스 카탈로그. 생성 시 불변식을 검증합니다."""
    classes: tuple[ClassSpec, ...]

    def __post_init__(self):
        names = [c.name for c in self.classes]
        if len(names) != len(set(names)):
            raise CatalogError(f"중복된 클래스 이름이 있습니다: {names}")
        by_name = {c.name: c for c in self.classes}
        for spec in self.classes:
            if spec.size_m <= 0:
                raise CatalogError(f"[{spec.name}] size_m 은 양수여야 합니다")
            if spec.is_parent:
                if not spec.room_types:
                    raise CatalogError(f"[{spec.name}] 부모 클래스에는 room_types 가 필요합니다")
                continue
            parent = by_name.get(spec.parent) if spec.parent else None
            if parent is None or not parent.is_parent:
                raise CatalogError(f"[{spec.name}] 지정된 부모 클래스가 없습니다: {spec.parent}")
            if parent.size_m < spec.size_m:
                raise CatalogError(f"[{spec.name}] 부모 '{parent.name}' 의 크기가 자식보다 작습니다")

    def get(self, name: str) -> ClassSpec:
        for spec in self.classes:
            if spec.name == name:
                return spec
        raise UnknownClassError(f"등록되지 않은 클래스: {name}")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.classes]

    def targets(self) -> list[ClassSpec]:
        return [c for c in self.classes if not c.is_parent]

    def parents(self) -> list[ClassSpec]:
        return [c for c in self.classes if c.is_parent]

    def prototypes(self) -> list[str]:
        seen: dict[str, None] = {}
        for c in self.classes:
            seen.setdefault(c.prototype, None)
        return list(seen)

    def room_types(self) -> list[str]:
        rooms: dict[str, None] = {}
        for c in self.parents():
            for room in c.room_types:
                rooms.setdefault(room, None)
        return list(rooms)

    def parents_for_room(self, room_type: str) -> list[ClassSpec]:
        return [c for c in self.parents() if room_type in c.room_types]

    def targets_for_room(self, room_type: str) -> list[ClassSpec]:
        parent_names = {p.name for p in self.parents_for_room(room_type)}
        return [c for c in self.targets() if c.parent in parent_names]


@dataclass(frozen=True)
class EmbeddingTable:
    """클래스별 단어 임베딩 테이블 (생성 후 불변).

    Attributes:
        dim (int): 임베딩 차원 E.
        vectors (Mapping[str, np.ndarray]): 클래스 이름 → 길이 E 벡터 (읽기 전용).
    """
    dim: int
    vectors: Mapping[str, np.ndarray]

    def __post_init__(self):
        for name, vec in self.vectors.items():
            if vec.shape != (self.dim,):
                raise ValueError(f"[{name}] 임베딩 길이가 {self.dim} 이 아닙니다: {vec.shape}")
            vec.flags.writeable = False

    def __contains__(self, name: str) -> bool:
        return name in self.vectors

    @property
    def classes(self) -> list[str]:
        return list(self.vectors)


# =========================================================================
# 씬 / 에이전트
# =========================================================================

@dataclass(frozen=True)
class ObjectInstance:
    """씬에 배치된 객체 인스턴스.

    Attributes:
        instance_id (int): 씬 내 고유 id.
        class_name (str): 클래스 이름.
        x_w (float): 월드 x 좌표 (m).
        y_w (float): 월드 y 좌표 (m).
        z_w (float): 중심 높이 (m).
        size_m (float): 물리적 크기 (m).
        is_parent (bool): 부모 객체 여부.
    """
    instance_id: int
    class_name: str
    x_w: float
    y_w: float
    z_w: float
    size_m: float
    is_parent: bool = False


@dataclass(frozen=True)
class Scene:
    """격자형 방. 생성 후 불변입니다.

    Attributes:
        scene_id (str): 씬 id.
        width (int): x 방향 셀 수.
        height (int): y 방향 셀 수.
        blocked (frozenset[tuple[int, int]]): 막힌 셀 (i, j).
        objects (tuple[ObjectInstance, ...]): 배치된 객체.
        split (str): 'train' 또는 'test'.
        room_type (str): 방 종류.
        cell_m (float): 셀 한 변 길이 (m).
    """
    scene_id: str
    width: int
    height: int
    blocked: frozenset
    objects: tuple[ObjectInstance, ...]
    split: str = "train"
    room_type: str = "kitchen"
    cell_m: float = CELL_M

    def in_bounds(self, i: int, j: int) -> bool:
        return 0 <= i < self.width and 0 <= j < self.height

    def is_free(self, i: int, j: int) -> bool:
        return self.in_bounds(i, j) and (i, j) not in self.blocked

    def free_cells(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.width) for j in range(self.height) if (i, j) not in self.blocked]

    def instances_of(self, class_name: str) -> list[ObjectInstance]:
        return [o for o in self.objects if o.class_name == class_name]

    def classes_present(self) -> list[str]:
        seen: dict[str, None] = {}
        for o in self.objects:
            seen.setdefault(o.class_name, None)
        return list(seen)

    def target_classes(self) -> list[str]:
        return [name for name in self.classes_present() if not self.instances_of(name)[0].is_parent]


@dataclass(frozen=True)
class AgentPose:
    """에이전트 자세. heading 0° = +x, 반시계 방향 증가. pitch 는 위쪽이 양수."""
    i: int
    j: int
    heading: int = 0
    pitch: int = 0

    def position_m(self, cell_m: float = CELL_M) -> tuple[float, float]:
        return ((self.i + 0.5) * cell_m, (self.j + 0.5) * cell_m)


@dataclass(frozen=True)
class Detection:
    """정규화된 바운딩 박스 검출 결과.

    Attributes:
        class_name (str): 클래스 이름.
        x (float): 이미지 중심 x (0~1).
        y (float): 이미지 중심 y (0~1, 아래쪽 증가).
        area (float): 정규화된 박스 면적 S (0~1).
        depth (float): 카메라 좌표계 깊이 (m).
        instance_id (int): 원본 객체 인스턴스 id (-1 이면 미상).
    """
    class_name: str
    x: float
    y: float
    area: float
    depth: float = 0.0
    instance_id: int = -1


@dataclass(frozen=True)
class ParentProbTable:
    """target → {parent: Pr(t|p)} 테이블."""
    probs: Mapping[str, Mapping[str, float]]

    def prob(self, target: str, parent: str) -> float:
        return float(self.probs.get(target, {}).get(parent, 0.0))

    def parents_of(self, target: str) -> dict[str, float]:
        return dict(self.probs.get(target, {}))


@dataclass
class EpisodeState:
    """에피소드 진행 상태 (워커 단독 소유).

    Attributes:
        scene (Scene): 씬.
        pose (AgentPose): 현재 자세.
        target (str): 목표 클래스.
        step_count (int): 지금까지 수행한 행동 수 (Done 포함).
        rewarded_parents (set[int]): 부분 보상을 이미 받은 부모 인스턴스 id.
        done (bool): 종료 여부.
        success (bool): 성공 여부 (Done 행동에서만 설정).
        path_length_m (float): 이동 거리 (m).
    """
    scene: Scene
    pose: AgentPose
    target: str
    step_count: int = 0
    rewarded_parents: set[int] = field(default_factory=set)
    done: bool = False
    success: bool = False
    path_length_m: float = 0.0


# =========================================================================
# 에피소드 결과 / 평가
# =========================================================================

@dataclass(frozen=True)
class AttentionTrace:
    """한 스텝의 타겟 어텐션 기록."""
    detections: tuple[Detection, ...]
    corr: np.ndarray
    att: np.ndarray


@dataclass(frozen=True)
class StepRecord:
    step: int
    pose: AgentPose
    action: Action
    reward: float
    detections: tuple[Detection, ...]
    trace: Optional[AttentionTrace] = None


@dataclass(frozen=True)
class EpisodeResult:
    """에피소드 결과.

    Attributes:
        scene_id (str): 씬 id.
        room_type (str): 방 종류.
        target (str): 목표 클래스.
        success (bool): 성공 여부 S_i.
        actions_taken (int): 수행한 모든 행동 수 e_i (Done 포함).
        optimal_length (Optional[int]): 최적 경로 길이 L_i (Done 제외, 도달 불가면 None).
        total_reward (float): 누적 보상.
        path_length_m (float): 이동 거리 (m).
        steps (tuple[StepRecord, ...]): 스텝 기록 (궤적).
        start (Optional[AgentPose]): 시작 자세.
    """
    scene_id: str
    room_type: str
    target: str
    success: bool
    actions_taken: int
    optimal_length: Optional[int]
    total_reward: float = 0.0
    path_length_m: float = 0.0
    steps: tuple[StepRecord, ...] = ()
    start: Optional[AgentPose] = None

    @property
    def spl_term(self) -> float:
        if not self.success or not self.optimal_length:
            return 0.0 if not self.success else 1.0
        return self.optimal_length / max(self.optimal_length, self.actions_taken)


@dataclass(frozen=True)
class SplitSpec:
    """seen/unseen 클래스 분할과 train/test 씬 분할."""
    seen: tuple[str, ...]
    unseen: tuple[str, ...]
    train_scenes: tuple[str, ...] = ()
    test_scenes: tuple[str, ...] = ()

    def __post_init__(self):
        if set(self.seen) & set(self.unseen):
            raise ValueError(f"seen 과 unseen 이 겹칩니다: {set(self.seen) & set(self.unseen)}")
        if set(self.train_scenes) & set(self.test_scenes):
            raise ValueError("train 씬과 test 씬이 겹칩니다")


@dataclass(frozen=True)
class BucketStats:
    """한 버킷(L>=1, L>=5)의 SR/SPL (%). episodes 가 0 이면 빈 버킷입니다."""
    name: str
    sr: float
    spl: float
    episodes: int

    @property
    def is_empty(self) -> bool:
        return self.episodes == 0


@dataclass(frozen=True)
class EvalReport:
    """평가 리포트.

    Attributes:
        buckets (dict[str, BucketStats]): 'L>=1', 'L>=5' 버킷별 통계.
        per_class (dict[str, BucketStats]): 목표 클래스별 통계 (L>=1 버킷 기준).
        per_room (dict[str, BucketStats]): 방 종류별 통계 (L>=1 버킷 기준).
        provenance (dict[str, str]): 체크포인트 해시, 씬 분할, 시드 등.
    """
    buckets: dict[str, BucketStats]
    per_class: dict[str, BucketStats]
    per_room: dict[str, BucketStats]
    provenance: dict[str, str]


def ground_distance(ax: float, ay: float, bx: float, by: float) -> float:
    return math.hypot(ax - bx, ay - by)


# =========================================================================
# 체크포인트
# =========================================================================

@dataclass
class Checkpoint:
    """학습 상태 스냅샷.

    Attributes:
        config_hash (str): 모델 차원/변형/임베딩/카탈로그로부터 계산한 sha256 hex.
        episode (int): 지금까지 완료된(할당된) 에피소드 수.
        params_version (int): 파라미터 버전 카운터.
        params (dict[str, np.ndarray]): 등록 순서대로의 파라미터 값.
        adam_step (int): Adam 스텝 수.
        adam_m (dict[str, np.ndarray]): 1차 모멘트.
        adam_v (dict[str, np.ndarray]): 2차 모멘트.
        metadata (dict): rng 상태 등 JSON 직렬화 가능한 부가 정보.
    """
    config_hash: str
    episode: int
    params_version: int
    params: dict[str, np.ndarray]
    adam_step: int = 0
    adam_m: dict[str, np.ndarray] = field(default_factory=dict)
    adam_v: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def class_name_tokens(name: str) -> list[str]:
    """클래스 이름을 소문자 토큰으로 나눕니다 ('RemoteControl' → ['remote', 'control'])."""
    parts = []
    for chunk in re.split(r"[\s_\-]+", name.strip()):
        parts.extend(p for p in _CAMEL_BOUNDARY.split(chunk) if p)
    return [p.lower() for p in parts]


@dataclass(frozen=True)
class EpisodeSpec:
    """에피소드 조건 (씬, 시작 자세, 목표 클래스, 최적 경로 길이 L)."""
    scene: Scene
    start: AgentPose
    target: str
    optimal_length: Optional[int] = None
