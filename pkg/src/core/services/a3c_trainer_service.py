"""
A3C 학습 서비스

여러 워커 스레드가 각자 환경과 난수 생성기를 가지고 롤아웃을 수집하고,
공유 파라미터/Adam 상태에 잠금(lock) 하나로 보호된 업데이트를 적용합니다.

공유 상태 (모두 lock 안에서만 변경):
    - ParamSet 과 Adam 모멘트 (업데이트마다 version +1)
    - 에피소드 카운터 (예산을 정확히 소진)
    - 메트릭 기록, 체크포인트 저장
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from core.config import TrainConfig
from core.domain.models import Checkpoint, Scene
from core.errors import NonFiniteError
from core.grad.layers import Mode
from core.grad.optim import AdamOptimizer, AdamState
from core.grad.params import ParamSet
from core.grad.tensor import backward
from core.logger import logger
from core.model.tdanet import TdaNet
from core.ports.checkpoint_port import CheckpointPort
from core.ports.storage_port import StoragePort
from core.services.episode_sampling_service import EpisodeSampler
from core.services.navigation_env_service import NavigationEnvironment
from core.services.rollout_service import LossParts, ObservationHook, WorkerEpisode, a3c_loss, collect_rollout

METRICS_PATH = "logs/metrics.jsonl"
CHECKPOINT_DIR = "checkpoints"

Evaluator = Callable[[ParamSet], dict[str, float]]


class SharedTrainingState:
    """워커들이 공유하는 학습 상태.

    Attributes:
        params (ParamSet): 공유 파라미터.
        optimizer (AdamOptimizer): 공유 Adam (모멘트 상태 포함).
        budget (int): 전체 에피소드 예산.
        claimed (int): 지금까지 할당된 에피소드 수.
        completed (int): 지금까지 끝난 에피소드 수.
        updates_attempted (int): 시도한 업데이트 수.
        nan_skipped (int): 그래디언트가 유한하지 않아 건너뛴 업데이트 수.
    """

    def __init__(self, params: ParamSet, optimizer: AdamOptimizer, budget: int, start_episode: int = 0):
        self.params = params
        self.optimizer = optimizer
        self.budget = budget
        self.lock = threading.Lock()
        self.claimed = start_episode
        self.completed = start_episode
        self.updates_attempted = 0
        self.nan_skipped = 0
        self.rng_states: dict[str, Any] = {}

    def claim_episode(self) -> Optional[int]:
        """다음 에피소드 번호를 원자적으로 할당합니다. 예산을 다 쓰면 None."""
        with self.lock:
            if self.claimed >= self.budget:
                return None
            index = self.claimed
            self.claimed += 1
            return index

    def snapshot(self) -> ParamSet:
        with self.lock:
            return self.params.snapshot()


def apply_worker_update(shared: SharedTrainingState, grads: dict[str, np.ndarray]) -> Optional[int]:
    """로컬 그래디언트를 공유 파라미터에 적용합니다 (단일 작성자 구간).

    Returns:
        Optional[int]: 새 파라미터 버전. 그래디언트가 유한하지 않아 건너뛰면 None.
    """
    with shared.lock:
        shared.updates_attempted += 1
        try:
            return shared.optimizer.step(shared.params, grads)
        except NonFiniteError as e:
            shared.nan_skipped += 1
            logger.warning(f"[Service:A3CTrainer] 업데이트 건너뜀 (누적 {shared.nan_skipped}회): {e}")
            return None


@dataclass
class _EpisodeStats:
    reward: float
    length: int
    success: bool
    losses: list[LossParts] = field(default_factory=list)


@dataclass
class TrainResult:
    """학습 결과.

    Attributes:
        checkpoint (Checkpoint): 최종 상태.
        params (ParamSet): 최종 파라미터.
        episodes (int): 끝난 에피소드 수 (재개 전 포함).
        updates (int): 적용된 업데이트 수.
        nan_skipped (int): 건너뛴 업데이트 수.
        checkpoint_path (Optional[str]): 최종 체크포인트 경로.
    """
    checkpoint: Checkpoint
    params: ParamSet
    episodes: int
    updates: int
    nan_skipped: int
    checkpoint_path: Optional[str] = None


def build_checkpoint(shared: SharedTrainingState, config_hash: str, metadata: Optional[dict] = None) -> Checkpoint:
    """lock 을 잡은 상태에서 호출해야 합니다."""
    state = shared.optimizer.state
    return Checkpoint(
        config_hash=config_hash,
        episode=shared.completed,
        params_version=shared.params.version,
        params=shared.params.to_arrays(),
        adam_step=state.step,
        adam_m={name: m.copy() for name, m in state.m.items()},
        adam_v={name: v.copy() for name, v in state.v.items()},
        metadata={"rng_states": dict(shared.rng_states), **(metadata or {})},
    )


class A3CTrainer:
    """A3C 학습기.

    Attributes:
        model (TdaNet): 모델.
        env_factory (Callable[[], NavigationEnvironment]): 워커별 환경 생성 함수.
        config (TrainConfig): 학습 설정.
        storage (StoragePort): 메트릭 로그 저장소.
        checkpoints (Optional[CheckpointPort]): 체크포인트 저장소 (None 이면 저장 안 함).
        config_hash (str): 체크포인트에 기록할 설정 해시.
        evaluator (Optional[Evaluator]): eval_every 마다 스냅샷을 평가하는 함수.
        observation_hook (Optional[ObservationHook]): 정책 입력 관측 감사 훅.
        metrics_path (str): 메트릭 JSON-lines 경로.
        checkpoint_dir (Optional[str]): 체크포인트 디렉토리 (None 이면 저장 안 함).
    """

    def __init__(
        self,
        model: TdaNet,
        env_factory: Callable[[], NavigationEnvironment],
        config: TrainConfig,
        storage: StoragePort,
        checkpoints: Optional[CheckpointPort] = None,
        config_hash: str = "",
        evaluator: Optional[Evaluator] = None,
        observation_hook: Optional[ObservationHook] = None,
        metrics_path: str = METRICS_PATH,
        checkpoint_dir: Optional[str] = CHECKPOINT_DIR,
    ):
        self.model = model
        self.env_factory = env_factory
        self.config = config
        self.storage = storage
        self.checkpoints = checkpoints
        self.config_hash = config_hash
        self.evaluator = evaluator
        self.observation_hook = observation_hook
        self.metrics_path = metrics_path
        self.checkpoint_dir = checkpoint_dir
        self._window: list[_EpisodeStats] = []

    # ------------------------------------------------------------------
    # 준비
    # ------------------------------------------------------------------

    def _restore(self, params: ParamSet, resume: Optional[Checkpoint]) -> tuple[AdamOptimizer, int]:
        cfg = self.config
        state = AdamState()
        start_episode = 0
        if resume is not None:
            params.load_arrays(resume.params)
            params.version = resume.params_version
            state = AdamState(
                step=resume.adam_step,
                m={name: m.copy() for name, m in resume.adam_m.items()},
                v={name: v.copy() for name, v in resume.adam_v.items()},
            )
            start_episode = resume.episode
        optimizer = AdamOptimizer(cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.clip, state)
        return optimizer, start_episode

    def _worker_rng(self, worker_id: int, resume: Optional[Checkpoint]) -> np.random.Generator:
        rng = np.random.default_rng([self.config.seed, worker_id])
        saved = (resume.metadata.get("rng_states", {}) if resume is not None else {}).get(str(worker_id))
        if saved is not None:
            rng.bit_generator.state = saved
        return rng

    # ------------------------------------------------------------------
    # 학습
    # ------------------------------------------------------------------

    def train(
        self,
        scenes: Sequence[Scene],
        params: Optional[ParamSet] = None,
        resume: Optional[Checkpoint] = None,
        allowed_targets: Optional[Sequence[str]] = None,
    ) -> TrainResult:
        """config.episodes 예산을 워커들이 나눠 소진할 때까지 학습합니다.

        Args:
            scenes (Sequence[Scene]): 학습 씬 (비어 있으면 안 됨).
            params (Optional[ParamSet]): 초기 파라미터 (None 이면 model.init_params()).
            resume (Optional[Checkpoint]): 이어서 학습할 체크포인트 (에피소드 카운터/rng/Adam 복원).
            allowed_targets (Optional[Sequence[str]]): 목표로 쓸 클래스 (zero-shot 학습 시 seen 클래스).

        Returns:
            TrainResult: 최종 체크포인트와 카운터.

        Raises:
            EpisodeSamplingError: 허용 목표가 있는 학습 씬이 없는 경우.
        """
        cfg = self.config
        if not scenes:
            raise ValueError("학습 씬이 비어 있습니다")
        sampler = EpisodeSampler(scenes, allowed_targets)

        params = params if params is not None else self.model.init_params()
        optimizer, start_episode = self._restore(params, resume)
        shared = SharedTrainingState(params, optimizer, cfg.episodes, start_episode)
        if resume is not None:
            shared.rng_states = dict(resume.metadata.get("rng_states", {}))
        else:
            self.storage.put_file(self.metrics_path, b"")
        self._window = []

        logger.info(
            f"[Service:A3CTrainer] 학습 시작 (workers={cfg.workers}, episodes={start_episode}->{cfg.episodes}, "
            f"scenes={len(sampler.scenes)}, variant={self.model.variant})"
        )

        errors: list[BaseException] = []
        rngs = [self._worker_rng(w, resume) for w in range(cfg.workers)]
        if cfg.workers == 1:
            self._run_worker(0, shared, sampler, rngs[0])
        else:
            def job(worker_id: int) -> None:
                try:
                    self._run_worker(worker_id, shared, sampler, rngs[worker_id])
                except BaseException as e:  # 메인 스레드에서 다시 발생시킴
                    with shared.lock:
                        shared.claimed = shared.budget
                    errors.append(e)

            threads = [threading.Thread(target=job, args=(w,), name=f"W_{w}") for w in range(cfg.workers)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        if errors:
            raise errors[0]

        with shared.lock:
            if self._window:
                self._write_train_record(shared)
            checkpoint = build_checkpoint(shared, self.config_hash)
            path = None
            if self.checkpoints is not None and self.checkpoint_dir is not None:
                path = f"{self.checkpoint_dir}/final.bin"
                self.checkpoints.save(checkpoint, path)

        updates = shared.updates_attempted - shared.nan_skipped
        logger.info(
            f"[Service:A3CTrainer] 학습 완료 (episodes={shared.completed}, updates={updates}, "
            f"nan_skipped={shared.nan_skipped}, version={params.version})"
        )
        return TrainResult(checkpoint, params, shared.completed, updates, shared.nan_skipped, path)

    def _run_worker(
        self,
        worker_id: int,
        shared: SharedTrainingState,
        sampler: EpisodeSampler,
        rng: np.random.Generator,
    ) -> None:
        cfg = self.config
        env = self.env_factory()
        while shared.claim_episode() is not None:
            spec = sampler.sample(rng)
            episode = WorkerEpisode(
                state=env.reset(spec.scene, spec.start, spec.target),
                hidden=self.model.initial_hidden(),
                max_steps=cfg.max_steps,
            )
            losses: list[LossParts] = []
            while not episode.finished:
                snapshot = shared.snapshot()
                segment, episode = collect_rollout(
                    env, self.model, snapshot, episode, cfg.horizon, rng, Mode.TRAIN, self.observation_hook
                )
                loss, parts = a3c_loss(segment, cfg.gamma, cfg.entropy_weight, cfg.value_weight)
                apply_worker_update(shared, backward(loss, snapshot))
                losses.append(parts)

            stats = _EpisodeStats(
                reward=episode.total_reward,
                length=episode.state.step_count,
                success=episode.state.success,
                losses=losses,
            )
            self._finish_episode(worker_id, stats, shared, rng)

    def _finish_episode(
        self,
        worker_id: int,
        stats: _EpisodeStats,
        shared: SharedTrainingState,
        rng: np.random.Generator,
    ) -> None:
        cfg = self.config
        snapshot = None
        with shared.lock:
            shared.completed += 1
            shared.rng_states[str(worker_id)] = rng.bit_generator.state
            self._window.append(stats)
            done = shared.completed

            if done % cfg.log_every == 0:
                self._write_train_record(shared)
            if self._checkpoint_due(done):
                self.checkpoints.save(build_checkpoint(shared, self.config_hash), f"{self.checkpoint_dir}/ckpt_{done:07d}.bin")
            if self.evaluator is not None and cfg.eval_every and done % cfg.eval_every == 0:
                snapshot = shared.params.snapshot()

        # 평가는 lock 밖에서 실행하고 기록만 lock 안에서 씁니다
        if snapshot is not None:
            result = self.evaluator(snapshot)
            with shared.lock:
                self._write_record({"kind": "eval", "episode": done, **result})

    def _checkpoint_due(self, done: int) -> bool:
        every = self.config.checkpoint_every
        return self.checkpoints is not None and self.checkpoint_dir is not None and every > 0 and done % every == 0

    # ------------------------------------------------------------------
    # 메트릭
    # ------------------------------------------------------------------

    def _write_record(self, record: dict[str, Any]) -> None:
        self.storage.append_line(self.metrics_path, json.dumps(record, ensure_ascii=False))

    def _write_train_record(self, shared: SharedTrainingState) -> None:
        window, self._window = self._window, []
        losses = [p for s in window for p in s.losses]
        record = {
            "kind": "train",
            "episode": shared.completed,
            "episodes_in_window": len(window),
            "mean_reward": float(np.mean([s.reward for s in window])),
            "mean_length": float(np.mean([s.length for s in window])),
            "success_rate": float(np.mean([s.success for s in window])),
            "loss": float(np.mean([p.total for p in losses])),
            "policy_loss": float(np.mean([p.policy for p in losses])),
            "value_loss": float(np.mean([p.value for p in losses])),
            "entropy": float(np.mean([p.entropy for p in losses])),
            "params_version": shared.params.version,
            "nan_skipped": shared.nan_skipped,
        }
        self._write_record(record)
        logger.info(
            f"[Service:A3CTrainer] episode={record['episode']} reward={record['mean_reward']:.3f} "
            f"length={record['mean_length']:.1f} success={record['success_rate']:.2f} loss={record['loss']:.4f}"
        )
