from typing import Optional

import typer

from commands.common import (
    CONFIG_OPTION,
    OUT_OPTION,
    build_context,
    build_table,
    command_errors,
    load_checkpoint,
    load_scene_split,
    open_workspace,
)
from core.logger import logger
from core.model.tdanet import TdaNet, count_params
from core.services.a3c_trainer_service import A3CTrainer
from core.services.evaluation_service import EvaluationService
from core.services.experiment_service import ExperimentRunner


def train(
    config: Optional[str] = CONFIG_OPTION,
    resume: Optional[str] = typer.Option(None, "--resume", "-r", help="이어서 학습할 체크포인트 경로"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", min=1, help="A3C 워커 수 (설정 train.workers 덮어씀)"),
    episodes: Optional[int] = typer.Option(None, "--episodes", "-e", min=1, help="전체 에피소드 예산 (설정 train.episodes 덮어씀)"),
    out: Optional[str] = OUT_OPTION,
):
    """학습 씬으로 A3C 학습을 실행합니다.

    메트릭은 logs/metrics.jsonl, 체크포인트는 checkpoints/ 에 저장됩니다.
    --resume 은 에피소드 카운터, 난수 상태, Adam 상태를 복원합니다.
    """
    with command_errors("train"):
        ws = open_workspace(config, out, {"train.workers": workers, "train.episodes": episodes})
        table = build_table(ws)
        train_scenes, test_scenes = load_scene_split(ws)
        context = build_context(ws, table, train_scenes, test_scenes)
        runner = ExperimentRunner(ws.config, context, ws.storage)

        model = TdaNet(ws.config.model, table)
        params = model.init_params(ws.config.model.seed)
        checkpoint = None
        if resume:
            checkpoint, _ = load_checkpoint(ws, resume)
            logger.info(f"[CLI:train] 재개: episode={checkpoint.episode}, version={checkpoint.params_version}")

        evaluator = None
        cfg = ws.config
        if cfg.train.eval_every:
            eval_config = cfg.eval.model_copy(update={"episodes_per_bucket": cfg.train.eval_episodes})
            service = EvaluationService(runner.env_factory(), eval_config)
            eval_scenes = test_scenes or train_scenes
            def evaluator(snapshot):
                return service.quick_metrics(model, snapshot, eval_scenes)

        trainer = A3CTrainer(
            model,
            runner.env_factory(),
            cfg.train,
            ws.storage,
            ws.checkpoints,
            config_hash=ws.config_hash,
            evaluator=evaluator,
        )
        logger.info(f"[CLI:train] 모델 {model.variant} (params={count_params(params)})")
        result = trainer.train(train_scenes, params=params, resume=checkpoint)

        typer.echo(
            f"학습 완료: episodes={result.episodes}, updates={result.updates}, "
            f"nan_skipped={result.nan_skipped}, checkpoint={result.checkpoint_path}"
        )
