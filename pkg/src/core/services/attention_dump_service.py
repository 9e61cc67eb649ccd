"""
어텐션/궤적 덤프 서비스

학습된 에이전트로 에피소드 하나를 greedy 로 실행하고, 스텝별 검출 목록과 상관 점수(corr),
어텐션 가중치(att), 선택한 행동을 고정 키 문서로 만듭니다. 렌더러가 있으면 위에서 본 궤적 SVG 도 만듭니다.

문서에는 시간 값을 넣지 않습니다. 추론 지연 시간은 결과 객체와 로그로만 전달됩니다.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from core.config import CameraConfig
from core.domain.models import AgentPose, AttentionTrace, Detection, EpisodeResult, EpisodeSpec, StepRecord
from core.grad.params import ParamSet
from core.logger import logger
from core.model.tdanet import TdaNet, count_params
from core.ports.render_port import RenderPort
from core.services.evaluation_service import ModelPolicy
from core.services.navigation_env_service import NavigationEnvironment


@dataclass
class AttentionDump:
    """덤프 결과.

    Attributes:
        result (EpisodeResult): 에피소드 결과 (스텝 기록 포함).
        document (dict[str, Any]): 고정 키 덤프 문서.
        render (Optional[bytes]): SVG 문서 (렌더러가 없으면 None).
        mean_latency_ms (float): 스텝당 평균 forward 시간 (ms).
        num_params (int): 모델 파라미터 수.
    """
    result: EpisodeResult
    document: dict[str, Any]
    render: Optional[bytes]
    mean_latency_ms: float
    num_params: int


class _TimedPolicy:
    def __init__(self, policy: ModelPolicy):
        self.policy = policy
        self.elapsed: list[float] = []

    def __call__(self, detections: Sequence[Detection]) -> tuple[int, Optional[AttentionTrace]]:
        started = time.perf_counter()
        decision = self.policy(detections)
        self.elapsed.append(time.perf_counter() - started)
        return decision


def _pose_document(pose: AgentPose) -> dict[str, int]:
    return {"i": pose.i, "j": pose.j, "heading": pose.heading, "pitch": pose.pitch}


def _step_document(record: StepRecord, target: str) -> dict[str, Any]:
    trace = record.trace
    detections = []
    att_sum = None
    target_max = None
    if trace is not None and record.detections:
        for det, corr, att in zip(record.detections, trace.corr, trace.att):
            detections.append({
                "class": det.class_name,
                "x": round(det.x, 6),
                "y": round(det.y, 6),
                "area": round(det.area, 6),
                "corr": round(float(corr), 6),
                "att": round(float(att), 6),
            })
        att_sum = round(float(np.sum(trace.att)), 9)
        if any(d.class_name == target for d in record.detections):
            best = record.detections[int(np.argmax(trace.corr))]
            target_max = best.class_name == target
    else:
        detections = [
            {"class": d.class_name, "x": round(d.x, 6), "y": round(d.y, 6), "area": round(d.area, 6)}
            for d in record.detections
        ]

    return {
        "step": record.step,
        "pose": _pose_document(record.pose),
        "action": record.action.label,
        "reward": round(record.reward, 6),
        "detections": detections,
        "att_sum": att_sum,
        "target_max_corr": target_max,
    }


def dump_document(result: EpisodeResult, variant: str) -> dict[str, Any]:
    """EpisodeResult → 고정 키 덤프 문서."""
    steps = [_step_document(s, result.target) for s in result.steps]
    flagged = [s["target_max_corr"] for s in steps if s["target_max_corr"] is not None]
    return {
        "scene": result.scene_id,
        "room_type": result.room_type,
        "target": result.target,
        "variant": variant,
        "start": _pose_document(result.start) if result.start is not None else None,
        "optimal_length": result.optimal_length,
        "success": result.success,
        "actions_taken": result.actions_taken,
        "total_reward": round(result.total_reward, 6),
        "statistics": {
            "target_detected_steps": len(flagged),
            "target_max_corr_steps": sum(flagged),
            "target_max_corr_fraction": round(sum(flagged) / len(flagged), 6) if flagged else None,
        },
        "steps": steps,
    }


class AttentionDumpService:
    """에피소드 하나의 어텐션 덤프와 궤적 렌더를 만듭니다.

    Attributes:
        env (NavigationEnvironment): 환경.
        renderer (Optional[RenderPort]): 궤적 렌더러.
        camera (CameraConfig): 렌더링할 시야각.
    """

    def __init__(self, env: NavigationEnvironment, renderer: Optional[RenderPort] = None, camera: Optional[CameraConfig] = None):
        self.env = env
        self.renderer = renderer
        self.camera = camera or CameraConfig()

    def dump(self, model: TdaNet, params: ParamSet, spec: EpisodeSpec, max_steps: int) -> AttentionDump:
        """greedy 정책으로 에피소드를 실행하고 덤프를 만듭니다.

        Args:
            model (TdaNet): 모델.
            params (ParamSet): 파라미터.
            spec (EpisodeSpec): 씬/시작 자세/목표. optimal_length 가 없으면 BFS 로 채웁니다.
            max_steps (int): 최대 행동 수.

        Returns:
            AttentionDump: 결과, 문서, 렌더, 지연 시간.
        """
        if spec.optimal_length is None:
            length = self.env.optimal_path_length(spec.scene, spec.start, spec.target)
            spec = EpisodeSpec(spec.scene, spec.start, spec.target, length)

        policy = _TimedPolicy(ModelPolicy(model, params.snapshot(), spec.target))
        result = self.env.run_episode(spec, policy, max_steps)
        document = dump_document(result, model.variant)
        render = self.renderer.render_trajectory(spec.scene, result, self.camera) if self.renderer is not None else None

        latency = 1000.0 * float(np.mean(policy.elapsed)) if policy.elapsed else 0.0
        num_params = count_params(params)
        logger.info(
            f"[Service:AttentionDump] {spec.scene.scene_id}/{spec.target}: success={result.success}, "
            f"actions={result.actions_taken}, L={spec.optimal_length}, params={num_params}, latency={latency:.3f} ms"
        )
        return AttentionDump(result, document, render, latency, num_params)
