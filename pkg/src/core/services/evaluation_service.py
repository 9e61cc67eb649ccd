"""
평가 서비스

SR/SPL 을 L>=1, L>=5 두 버킷으로 계산합니다.

    SR  = (1/N) Σ S_i
    SPL = (1/N) Σ S_i · L_i / max(L_i, e_i)

에피소드는 샘플링 시점에 BFS 로 L_i 를 구해 버킷을 채우고 (도달 불가/L=0 은 다시 뽑음),
ThreadPoolExecutor 로 병렬 실행한 뒤 리포트는 단일 스레드에서 모읍니다.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np
from tabulate import tabulate

from core.config import EvalConfig
from core.domain.models import (
    NUM_ACTIONS,
    AttentionTrace,
    BucketStats,
    Detection,
    EpisodeResult,
    EpisodeSpec,
    EvalReport,
    Scene,
)
from core.errors import MetricInvariantError
from core.grad.layers import Mode, softmax
from core.grad.params import ParamSet
from core.logger import logger
from core.model.tdanet import TdaNet
from core.services.episode_sampling_service import EpisodeSampler
from core.services.navigation_env_service import NavigationEnvironment

BUCKETS = (("L>=1", 1), ("L>=5", 5))
MAX_DRAWS_PER_EPISODE = 20

PolicyFactory = Callable[[EpisodeSpec, np.random.Generator], Callable]


# =========================================================================
# 지표
# =========================================================================

def compute_bucket_metrics(results: Sequence[EpisodeResult], name: str) -> BucketStats:
    """에피소드 결과 → SR/SPL (%). 결과가 없으면 episodes=0 인 빈 버킷입니다.

    Raises:
        MetricInvariantError: 성공 에피소드의 행동 수가 최적 경로 길이보다 짧은 경우.
    """
    if not results:
        return BucketStats(name=name, sr=0.0, spl=0.0, episodes=0)

    for r in results:
        if r.success and r.optimal_length is not None and r.actions_taken < r.optimal_length:
            raise MetricInvariantError(
                f"성공 에피소드의 행동 수({r.actions_taken})가 최적 경로 길이({r.optimal_length})보다 짧습니다 "
                f"(scene={r.scene_id}, target={r.target})"
            )

    n = len(results)
    sr = 100.0 * sum(r.success for r in results) / n
    spl = 100.0 * sum(r.spl_term for r in results) / n
    return BucketStats(name=name, sr=sr, spl=spl, episodes=n)


def _grouped(results: Sequence[EpisodeResult], key: Callable[[EpisodeResult], str]) -> dict[str, BucketStats]:
    groups: dict[str, list[EpisodeResult]] = {}
    for r in results:
        groups.setdefault(key(r), []).append(r)
    return {name: compute_bucket_metrics(groups[name], name) for name in sorted(groups)}


def build_report(results: Sequence[EpisodeResult], provenance: Optional[Mapping[str, Any]] = None) -> EvalReport:
    """에피소드 풀 → EvalReport. L>=5 버킷은 항상 L>=1 버킷의 부분집합입니다."""
    buckets = {
        name: compute_bucket_metrics([r for r in results if (r.optimal_length or 0) >= low], name)
        for name, low in BUCKETS
    }
    base = [r for r in results if (r.optimal_length or 0) >= 1]
    return EvalReport(
        buckets=buckets,
        per_class=_grouped(base, lambda r: r.target),
        per_room=_grouped(base, lambda r: r.room_type),
        provenance={k: str(v) for k, v in (provenance or {}).items()},
    )


def _stats_document(stats: BucketStats) -> dict[str, Any]:
    return {
        "sr": round(stats.sr, 6),
        "spl": round(stats.spl, 6),
        "episodes": stats.episodes,
        "empty": stats.is_empty,
    }


def report_to_document(report: EvalReport) -> dict[str, Any]:
    """EvalReport → 고정 키 순서의 YAML/JSON 문서."""
    return {
        "buckets": {name: _stats_document(s) for name, s in report.buckets.items()},
        "per_class": {name: _stats_document(s) for name, s in report.per_class.items()},
        "per_room": {name: _stats_document(s) for name, s in report.per_room.items()},
        "provenance": dict(sorted(report.provenance.items())),
    }


def _cell(stats: BucketStats, value: float) -> str:
    return "-" if stats.is_empty else f"{value:.1f}"


def summary_table(reports: Mapping[str, EvalReport]) -> str:
    """행 = 리포트 이름, 열 = 버킷별 SR/SPL 인 정렬된 텍스트 표."""
    headers = ["Method"]
    for name, _ in BUCKETS:
        headers += [f"SR {name}", f"SPL {name}", f"N {name}"]
    rows = []
    for label, report in reports.items():
        row: list[Any] = [label]
        for name, _ in BUCKETS:
            stats = report.buckets[name]
            row += [_cell(stats, stats.sr), _cell(stats, stats.spl), stats.episodes]
        rows.append(row)
    return tabulate(rows, headers=headers, tablefmt="github")


# =========================================================================
# 정책
# =========================================================================

class ModelPolicy:
    """학습된 모델 정책. 에피소드마다 새로 만들어 LSTM 상태를 초기화합니다.

    Attributes:
        model (TdaNet): 모델.
        params (ParamSet): 읽기 전용 파라미터.
        target (str): 목표 클래스.
        greedy (bool): True 면 argmax, False 면 softmax 샘플링.
        rng (Optional[np.random.Generator]): 샘플링용 난수 생성기.
    """

    def __init__(
        self,
        model: TdaNet,
        params: ParamSet,
        target: str,
        greedy: bool = True,
        rng: Optional[np.random.Generator] = None,
    ):
        if not greedy and rng is None:
            raise ValueError("샘플링 정책에는 rng 가 필요합니다")
        self.model = model
        self.params = params
        self.target = target
        self.greedy = greedy
        self.rng = rng
        self.hidden = model.initial_hidden()

    def __call__(self, detections: Sequence[Detection]) -> tuple[int, Optional[AttentionTrace]]:
        output, self.hidden, trace = self.model.forward(self.params, detections, self.target, self.hidden, Mode.EVAL)
        logits = output.logits.numpy()[0]
        if self.greedy:
            return int(np.argmax(logits)), trace
        probs = softmax(output.logits).numpy()[0]
        return int(self.rng.choice(NUM_ACTIONS, p=probs / probs.sum())), trace


class RandomPolicy:
    """균등 분포에서 행동을 뽑는 기준선 정책."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def __call__(self, detections: Sequence[Detection]) -> int:
        return int(self.rng.integers(NUM_ACTIONS))


# =========================================================================
# 서비스
# =========================================================================

class EvaluationService:
    """평가 하네스.

    Attributes:
        env_factory (Callable[[], NavigationEnvironment]): 스레드별 환경 생성 함수.
        config (EvalConfig): 평가 설정 (버킷당 에피소드 수, 시드, 워커 수, greedy, max_steps).
    """

    def __init__(self, env_factory: Callable[[], NavigationEnvironment], config: EvalConfig):
        self.env_factory = env_factory
        self.config = config
        self._local = threading.local()

    def _env(self) -> NavigationEnvironment:
        env = getattr(self._local, "env", None)
        if env is None:
            env = self.env_factory()
            self._local.env = env
        return env

    def sample_episodes(self, scenes: Sequence[Scene], targets: Optional[Sequence[str]] = None) -> list[EpisodeSpec]:
        """버킷 할당량을 채울 때까지 에피소드를 뽑습니다.

        L>=1 인 에피소드와 L>=5 인 에피소드가 각각 episodes_per_bucket 개 이상 모이면 멈춥니다.
        도달할 수 없거나 시작부터 목표가 보이는(L=0) 에피소드는 버리고 다시 뽑습니다.
        뽑기 횟수는 episodes_per_bucket × MAX_DRAWS_PER_EPISODE 로 제한되며, 그 안에 못 채운 버킷은
        적은 에피소드(또는 빈 버킷)로 보고됩니다.

        Args:
            scenes (Sequence[Scene]): 평가 씬.
            targets (Optional[Sequence[str]]): 허용 목표 클래스 (None 이면 전부).

        Returns:
            list[EpisodeSpec]: optimal_length 가 채워진 에피소드 목록.

        Raises:
            EpisodeSamplingError: 허용 목표가 있는 씬이 없는 경우.
        """
        quota = self.config.episodes_per_bucket
        sampler = EpisodeSampler(scenes, targets)
        rng = np.random.default_rng(self.config.seed)
        env = self._env()

        pool: list[EpisodeSpec] = []
        counts = {name: 0 for name, _ in BUCKETS}
        draws = 0
        while any(c < quota for c in counts.values()) and draws < quota * MAX_DRAWS_PER_EPISODE:
            draws += 1
            spec = sampler.sample(rng)
            length = env.optimal_path_length(spec.scene, spec.start, spec.target)
            if length is None or length < 1:
                continue
            pool.append(EpisodeSpec(spec.scene, spec.start, spec.target, length))
            for name, low in BUCKETS:
                if length >= low:
                    counts[name] += 1

        for name, count in counts.items():
            if count < quota:
                logger.warning(f"[Service:Evaluation] {name} 버킷을 채우지 못했습니다 ({count}/{quota}, draws={draws})")
        logger.info(f"[Service:Evaluation] 에피소드 {len(pool)}개 샘플링 (draws={draws}, {counts})")
        return pool

    def run_episodes(self, specs: Sequence[EpisodeSpec], policy_factory: PolicyFactory) -> list[EpisodeResult]:
        """에피소드를 병렬로 실행합니다. 결과 순서는 specs 순서와 같습니다.

        에피소드 i 는 default_rng([seed, i]) 를 정책과 관측 노이즈에 사용하므로 워커 수와 무관하게 결정적입니다.
        """
        seed = self.config.seed
        max_steps = self.config.max_steps

        def job(index: int) -> EpisodeResult:
            spec = specs[index]
            rng = np.random.default_rng([seed, index])
            return self._env().run_episode(spec, policy_factory(spec, rng), max_steps, rng)

        if self.config.workers == 1:
            return [job(i) for i in range(len(specs))]

        results: list[Optional[EpisodeResult]] = [None] * len(specs)
        with ThreadPoolExecutor(max_workers=self.config.workers, thread_name_prefix="eval") as executor:
            future_to_index = {executor.submit(job, i): i for i in range(len(specs))}
            for future, index in future_to_index.items():
                results[index] = future.result()
        return results

    def _provenance(self, extra: Optional[Mapping[str, Any]], policy: str) -> dict[str, Any]:
        return {
            "policy": policy,
            "seed": self.config.seed,
            "episodes_per_bucket": self.config.episodes_per_bucket,
            "max_steps": self.config.max_steps,
            **(extra or {}),
        }

    def evaluate(
        self,
        model: TdaNet,
        params: ParamSet,
        scenes: Sequence[Scene],
        targets: Optional[Sequence[str]] = None,
        provenance: Optional[Mapping[str, Any]] = None,
    ) -> EvalReport:
        """모델을 평가합니다. params 는 변경하지 않습니다 (스냅샷으로 실행).

        Args:
            model (TdaNet): 모델.
            params (ParamSet): 평가할 파라미터.
            scenes (Sequence[Scene]): 평가 씬.
            targets (Optional[Sequence[str]]): 목표 클래스 필터 (seen/unseen 분할).
            provenance (Optional[Mapping[str, Any]]): 체크포인트 해시, 분할 등 리포트에 남길 정보.

        Returns:
            EvalReport: 버킷/클래스/방 종류별 SR, SPL.
        """
        snapshot = params.snapshot()
        greedy = self.config.greedy
        specs = self.sample_episodes(scenes, targets)

        def factory(spec: EpisodeSpec, rng: np.random.Generator) -> ModelPolicy:
            return ModelPolicy(model, snapshot, spec.target, greedy, rng)

        results = self.run_episodes(specs, factory)
        report = build_report(results, self._provenance(provenance, "greedy" if greedy else "sample"))
        self._log(report)
        return report

    def random_baseline(
        self,
        scenes: Sequence[Scene],
        targets: Optional[Sequence[str]] = None,
        provenance: Optional[Mapping[str, Any]] = None,
    ) -> EvalReport:
        """균등 무작위 정책을 같은 파이프라인으로 평가합니다."""
        specs = self.sample_episodes(scenes, targets)
        results = self.run_episodes(specs, lambda spec, rng: RandomPolicy(rng))
        report = build_report(results, self._provenance(provenance, "random"))
        self._log(report)
        return report

    def quick_metrics(self, model: TdaNet, params: ParamSet, scenes: Sequence[Scene]) -> dict[str, float]:
        """학습 중 eval 기록용 L>=1 버킷 SR/SPL."""
        stats = self.evaluate(model, params, scenes).buckets["L>=1"]
        return {"sr": round(stats.sr, 6), "spl": round(stats.spl, 6), "episodes": stats.episodes}

    def _log(self, report: EvalReport) -> None:
        parts = ", ".join(
            f"{s.name}: SR={s.sr:.1f} SPL={s.spl:.1f} (n={s.episodes})" for s in report.buckets.values()
        )
        logger.info(f"[Service:Evaluation] {report.provenance.get('policy', '')} {parts}")
