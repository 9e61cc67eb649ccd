"""
격자 내비게이션 환경 서비스

이산 행동 동역학, 가시성/성공 판정, 부모 객체 부분 보상이 포함된 보상 함수,
BFS 최적 경로 길이, 에피소드 실행기를 제공합니다.

보상 규칙 (한 스텝):
    - 처음 보이는 부모 인스턴스 p (Pr(t|p) > 0) 마다 R_t · Pr(t|p) · k (인스턴스당 한 번)
    - Done 이고 목표가 보이면 R_t
    - 위 항목이 하나도 해당하지 않으면 −0.01
"""
from __future__ import annotations

import math
from collections import OrderedDict, deque
from dataclasses import replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from core.domain.models import (
    MOTION_ACTIONS,
    NUM_ACTIONS,
    VISIBILITY_DISTANCE_M,
    Action,
    AgentPose,
    AttentionTrace,
    Detection,
    EpisodeResult,
    EpisodeSpec,
    EpisodeState,
    ObjectInstance,
    ParentProbTable,
    Scene,
    StepRecord,
    ground_distance,
)
from core.errors import InvalidActionError
from core.ports.detector_port import DetectorPort

TARGET_REWARD = 5.0
PARENT_REWARD_SCALE = 0.1
STEP_PENALTY = -0.01
ROTATE_DEG = 45
LOOK_DEG = 30
MAX_PITCH = 30
VISIBLE_CACHE_SIZE = 4096

PolicyFn = Callable[[Sequence[Detection]], Union[int, tuple[int, Optional[AttentionTrace]]]]
DetectionFilter = Callable[[list[Detection]], list[Detection]]


def step_dynamics(scene: Scene, pose: AgentPose, action: Action) -> tuple[AgentPose, bool]:
    """행동 하나를 자세에 적용합니다 (Done 은 자세를 바꾸지 않음).

    Returns:
        tuple[AgentPose, bool]: (새 자세, 충돌 여부)
    """
    if action is Action.MOVE_AHEAD:
        rad = math.radians(pose.heading)
        di, dj = int(round(math.cos(rad))), int(round(math.sin(rad)))
        ni, nj = pose.i + di, pose.j + dj
        if not scene.is_free(ni, nj):
            return pose, True
        return replace(pose, i=ni, j=nj), False
    if action is Action.ROTATE_LEFT:
        return replace(pose, heading=(pose.heading + ROTATE_DEG) % 360), False
    if action is Action.ROTATE_RIGHT:
        return replace(pose, heading=(pose.heading - ROTATE_DEG) % 360), False
    if action is Action.LOOK_UP:
        return replace(pose, pitch=min(MAX_PITCH, pose.pitch + LOOK_DEG)), False
    if action is Action.LOOK_DOWN:
        return replace(pose, pitch=max(-MAX_PITCH, pose.pitch - LOOK_DEG)), False
    return pose, False


def sample_start(scene: Scene, rng: np.random.Generator) -> AgentPose:
    """빈 셀 × 8 방향에서 균등하게 시작 자세를 뽑습니다 (pitch 0)."""
    cells = scene.free_cells()
    i, j = cells[int(rng.integers(len(cells)))]
    return AgentPose(i, j, heading=int(rng.integers(8)) * ROTATE_DEG, pitch=0)


class NavigationEnvironment:
    """내비게이션 환경.

    Attributes:
        detector (DetectorPort): 관측/가시성 판정용 검출기. 가시성은 항상 노이즈 없이 계산합니다.
        parent_table (ParentProbTable): 부분 보상용 Pr(t|p) 테이블.
        detection_filter (Optional[DetectionFilter]): 관측을 정책에 넘기기 전에 적용할 마스크 훅.
    """

    def __init__(
        self,
        detector: DetectorPort,
        parent_table: ParentProbTable,
        detection_filter: Optional[DetectionFilter] = None,
    ):
        self.detector = detector
        self.parent_table = parent_table
        self.detection_filter = detection_filter
        # (scene_id, 자세) -> (씬, 보이는 id). 같은 id 라도 다른 씬 객체면 다시 계산합니다
        self._visible_cache: OrderedDict[tuple[str, AgentPose], tuple[Scene, frozenset[int]]] = OrderedDict()

    # ------------------------------------------------------------------
    # 가시성
    # ------------------------------------------------------------------

    def visible_instances(self, scene: Scene, pose: AgentPose) -> frozenset[int]:
        """현재 자세에서 보이는(시야 내 + 1.5 m 이내) 인스턴스 id 집합."""
        key = (scene.scene_id, pose)
        cached = self._visible_cache.get(key)
        if cached is not None and cached[0] is scene:
            self._visible_cache.move_to_end(key)
            return cached[1]
        cam_x, cam_y = pose.position_m(scene.cell_m)
        by_id = {o.instance_id: o for o in scene.objects}
        visible = frozenset(
            d.instance_id
            for d in self.detector.detect(scene, pose)
            if d.instance_id in by_id
            and ground_distance(by_id[d.instance_id].x_w, by_id[d.instance_id].y_w, cam_x, cam_y) <= VISIBILITY_DISTANCE_M
        )
        self._visible_cache[key] = (scene, visible)
        self._visible_cache.move_to_end(key)
        if len(self._visible_cache) > VISIBLE_CACHE_SIZE:
            self._visible_cache.popitem(last=False)
        return visible

    def is_visible(self, scene: Scene, pose: AgentPose, instance: ObjectInstance) -> bool:
        return instance.instance_id in self.visible_instances(scene, pose)

    def target_visible(self, scene: Scene, pose: AgentPose, target: str) -> bool:
        visible = self.visible_instances(scene, pose)
        return any(o.instance_id in visible for o in scene.instances_of(target))

    # ------------------------------------------------------------------
    # 보상
    # ------------------------------------------------------------------

    def reward(self, state: EpisodeState, action: Action, visible: frozenset[int]) -> tuple[float, EpisodeState]:
        """행동 후 관측(visible)에 대한 보상과 갱신된 상태를 반환합니다.

        Args:
            state (EpisodeState): 행동 후 자세가 반영된 상태 (done 이 아니어야 함).
            action (Action): 수행한 행동.
            visible (frozenset[int]): 행동 후 자세에서 보이는 인스턴스 id.

        Returns:
            tuple[float, EpisodeState]: (스텝 보상, 새 상태)
        """
        total = 0.0
        fired = False
        rewarded = set(state.rewarded_parents)
        for obj in state.scene.objects:
            if not obj.is_parent or obj.instance_id not in visible or obj.instance_id in rewarded:
                continue
            prob = self.parent_table.prob(state.target, obj.class_name)
            if prob <= 0.0:
                continue
            total += TARGET_REWARD * prob * PARENT_REWARD_SCALE
            rewarded.add(obj.instance_id)
            fired = True

        done = state.done
        success = state.success
        if action is Action.DONE:
            done = True
            success = any(o.instance_id in visible for o in state.scene.instances_of(state.target))
            if success:
                total += TARGET_REWARD
                fired = True

        if not fired:
            total = STEP_PENALTY
        return total, replace(state, rewarded_parents=rewarded, done=done, success=success)

    # ------------------------------------------------------------------
    # 스텝 / 에피소드
    # ------------------------------------------------------------------

    def reset(self, scene: Scene, start: AgentPose, target: str) -> EpisodeState:
        return EpisodeState(scene=scene, pose=start, target=target)

    def observe(self, state: EpisodeState, rng: Optional[np.random.Generator] = None) -> list[Detection]:
        detections = self.detector.detect(state.scene, state.pose, rng)
        if self.detection_filter is not None:
            detections = self.detection_filter(detections)
        return detections

    def step(self, state: EpisodeState, action: Action) -> tuple[float, EpisodeState]:
        """행동을 적용하고 (보상, 새 상태) 를 반환합니다."""
        pose, _ = step_dynamics(state.scene, state.pose, action)
        moved = 0.0
        if pose != state.pose and action is Action.MOVE_AHEAD:
            moved = math.hypot(pose.i - state.pose.i, pose.j - state.pose.j) * state.scene.cell_m
        advanced = replace(
            state,
            pose=pose,
            step_count=state.step_count + 1,
            path_length_m=state.path_length_m + moved,
        )
        return self.reward(advanced, action, self.visible_instances(state.scene, pose))

    def run_episode(
        self,
        spec: EpisodeSpec,
        policy: PolicyFn,
        max_steps: int,
        rng: Optional[np.random.Generator] = None,
    ) -> EpisodeResult:
        """정책으로 에피소드 하나를 실행합니다.

        Args:
            spec (EpisodeSpec): 씬/시작 자세/목표.
            policy (PolicyFn): 검출 목록 → 행동 인덱스 (또는 (인덱스, 어텐션 기록)).
            max_steps (int): 최대 행동 수 (1 이상).
            rng (Optional[np.random.Generator]): 관측 노이즈용 난수 생성기.

        Returns:
            EpisodeResult: Done 을 포함한 모든 행동 수와 스텝 기록.
        """
        if max_steps < 1:
            raise ValueError(f"max_steps 는 1 이상이어야 합니다: {max_steps}")

        state = self.reset(spec.scene, spec.start, spec.target)
        records: list[StepRecord] = []
        total_reward = 0.0
        while not state.done and state.step_count < max_steps:
            detections = self.observe(state, rng)
            decision = policy(detections)
            index, trace = decision if isinstance(decision, tuple) else (decision, None)
            action = to_action(index)
            pose_before = state.pose
            reward, state = self.step(state, action)
            total_reward += reward
            records.append(StepRecord(len(records), pose_before, action, reward, tuple(detections), trace))

        return EpisodeResult(
            scene_id=spec.scene.scene_id,
            room_type=spec.scene.room_type,
            target=spec.target,
            success=state.success,
            actions_taken=state.step_count,
            optimal_length=spec.optimal_length,
            total_reward=total_reward,
            path_length_m=state.path_length_m,
            steps=tuple(records),
            start=spec.start,
        )

    # ------------------------------------------------------------------
    # 최적 경로
    # ------------------------------------------------------------------

    def shortest_action_path(self, scene: Scene, start: AgentPose, target: str) -> Optional[list[Action]]:
        """목표가 보이는 상태까지의 최단 이동 행동열 (Done 제외). 도달 불가면 None."""
        if not scene.instances_of(target):
            return None
        if self.target_visible(scene, start, target):
            return []

        parents: dict[AgentPose, tuple[AgentPose, Action]] = {}
        queue = deque([start])
        seen = {start}
        while queue:
            pose = queue.popleft()
            for action in MOTION_ACTIONS:
                nxt, _ = step_dynamics(scene, pose, action)
                if nxt in seen:
                    continue
                seen.add(nxt)
                parents[nxt] = (pose, action)
                if self.target_visible(scene, nxt, target):
                    path = [action]
                    cursor = pose
                    while cursor != start:
                        cursor, prev_action = parents[cursor]
                        path.append(prev_action)
                    path.reverse()
                    return path
                queue.append(nxt)
        return None

    def optimal_path_length(self, scene: Scene, start: AgentPose, target: str) -> Optional[int]:
        """최적 경로 길이 L (Done 제외). 도달 불가면 None."""
        path = self.shortest_action_path(scene, start, target)
        return None if path is None else len(path)


def to_action(index: int) -> Action:
    if isinstance(index, bool) or not isinstance(index, (int, np.integer)) or not 0 <= int(index) < NUM_ACTIONS:
        raise InvalidActionError(f"유효하지 않은 행동 인덱스: {index!r}")
    return Action(int(index))
