"""
실험 실행기

(모델 변형, 시드, 분할) 하나를 학습하고 평가하는 단위 작업입니다.
ablation/zero-shot 캠페인과 CLI 명령이 이 실행기를 공유합니다.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from core.config import RunConfig, config_hash
from core.domain.models import ClassCatalog, EmbeddingTable, EvalReport, ParentProbTable, Scene, SplitSpec
from core.errors import MetricInvariantError
from core.grad.params import ParamSet
from core.logger import logger
from core.model.tdanet import TdaNet
from core.ports.checkpoint_port import CheckpointPort
from core.ports.detector_port import DetectorPort
from core.ports.storage_port import StoragePort
from core.services.a3c_trainer_service import A3CTrainer, TrainResult
from core.services.evaluation_service import EvaluationService
from core.services.navigation_env_service import NavigationEnvironment
from core.services.zero_shot_service import DetectionMask, mask_for


@dataclass(frozen=True)
class ExperimentContext:
    """실험에 필요한 고정 입력.

    Attributes:
        catalog (ClassCatalog): 클래스 카탈로그.
        table (EmbeddingTable): 클래스 임베딩.
        parent_table (ParentProbTable): 학습 씬에서 계산한 Pr(t|p).
        train_scenes (tuple[Scene, ...]): 학습 씬.
        test_scenes (tuple[Scene, ...]): 평가 씬.
        detector_factory (Callable[[], DetectorPort]): 환경별 검출기 생성 함수.
    """
    catalog: ClassCatalog
    table: EmbeddingTable
    parent_table: ParentProbTable
    train_scenes: tuple[Scene, ...]
    test_scenes: tuple[Scene, ...]
    detector_factory: Callable[[], DetectorPort]


def split_label(split: Optional[SplitSpec]) -> str:
    if split is None:
        return "all"
    return f"seen={','.join(split.seen)};unseen={','.join(split.unseen)}"


class ExperimentRunner:
    """변형/시드 단위로 학습과 평가를 수행합니다.

    run 디렉토리: `{root}/{variant}/seed_{seed}/` 아래에 metrics.jsonl 과 checkpoints/ 를 둡니다.

    Attributes:
        config (RunConfig): 기준 설정. 변형과 시드만 바꿔 사용합니다.
        context (ExperimentContext): 씬/임베딩/검출기.
        storage (StoragePort): 메트릭 저장소.
        checkpoints (Optional[CheckpointPort]): 체크포인트 저장소 (None 이면 저장 안 함).
        root (str): 캠페인 출력 디렉토리.
    """

    def __init__(
        self,
        config: RunConfig,
        context: ExperimentContext,
        storage: StoragePort,
        checkpoints: Optional[CheckpointPort] = None,
        root: str = "campaigns",
    ):
        self.config = config
        self.context = context
        self.storage = storage
        self.checkpoints = checkpoints
        self.root = root

    def env_factory(self, mask: Optional[DetectionMask] = None) -> Callable[[], NavigationEnvironment]:
        ctx = self.context

        def build() -> NavigationEnvironment:
            return NavigationEnvironment(ctx.detector_factory(), ctx.parent_table, mask)

        return build

    def model_for(self, variant: str, seed: int) -> TdaNet:
        return TdaNet(self.config.model.model_copy(update={"variant": variant, "seed": seed}), self.context.table)

    def train(self, variant: str, seed: int, split: Optional[SplitSpec] = None) -> tuple[TdaNet, TrainResult]:
        """변형 하나를 시드 하나로 학습합니다. 분할이 있으면 seen 목표만 쓰고 unseen 검출을 숨깁니다.

        Raises:
            MetricInvariantError: 숨긴 클래스의 검출이 정책 입력에 도달한 경우.
        """
        model = self.model_for(variant, seed)
        mask = mask_for(split)
        run_dir = f"{self.root}/{variant}/seed_{seed}"
        trainer = A3CTrainer(
            model,
            self.env_factory(mask),
            self.config.train.model_copy(update={"seed": seed}),
            self.storage,
            self.checkpoints,
            config_hash=config_hash(self.config.model_copy(update={"model": model.config})),
            observation_hook=mask.audit if mask is not None else None,
            metrics_path=f"{run_dir}/metrics.jsonl",
            checkpoint_dir=f"{run_dir}/checkpoints" if self.checkpoints is not None else None,
        )
        result = trainer.train(
            self.context.train_scenes,
            params=model.init_params(seed),
            allowed_targets=split.seen if split is not None else None,
        )

        if mask is not None:
            if mask.leaked:
                raise MetricInvariantError(f"[{variant}/seed_{seed}] unseen 클래스 검출 {mask.leaked}건이 정책 입력에 도달했습니다")
            logger.info(f"[Service:Experiment] {variant}/seed_{seed} unseen 검출 {mask.removed}건 제거, 누출 0건")
        return model, result

    def evaluate(
        self,
        model: TdaNet,
        params: ParamSet,
        split: Optional[SplitSpec] = None,
        config_digest: str = "",
    ) -> dict[str, EvalReport]:
        """평가 씬에서 그룹별 리포트를 만듭니다. 분할이 없으면 'all', 있으면 'seen'/'unseen'."""
        service = EvaluationService(self.env_factory(), self.config.eval)
        scenes = self.context.test_scenes
        provenance = {
            "config_hash": config_digest,
            "variant": model.variant,
            "scenes": ",".join(s.scene_id for s in scenes),
            "split": split_label(split),
        }
        if split is None:
            return {"all": service.evaluate(model, params, scenes, provenance=provenance)}
        return {
            "seen": service.evaluate(model, params, scenes, split.seen, provenance),
            "unseen": service.evaluate(model, params, scenes, split.unseen, provenance),
        }

    def run(self, variant: str, seed: int, split: Optional[SplitSpec] = None) -> dict[str, EvalReport]:
        logger.info(f"[Service:Experiment] 실행 시작 (variant={variant}, seed={seed}, split={split_label(split)})")
        model, result = self.train(variant, seed, split)
        return self.evaluate(model, result.params, split, config_digest=result.checkpoint.config_hash)

    def random_baseline(self, targets: Optional[tuple[str, ...]] = None) -> EvalReport:
        service = EvaluationService(self.env_factory(), self.config.eval)
        return service.random_baseline(self.context.test_scenes, targets, {"split": ",".join(targets or ())})
