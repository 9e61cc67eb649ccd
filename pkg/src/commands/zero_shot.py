from typing import List, Optional

import typer
import yaml

from commands.campaign_output import save_campaign
from commands.common import (
    CONFIG_OPTION,
    OUT_OPTION,
    build_context,
    build_table,
    command_errors,
    load_scene_split,
    open_workspace,
    resolve_split,
)
from core.logger import logger
from core.services.campaign_service import run_zero_shot
from core.services.experiment_service import ExperimentRunner


def zero_shot(
    config: Optional[str] = CONFIG_OPTION,
    seeds: List[int] = typer.Option([0], "--seed", "-s", help="학습 시드 (여러 번 지정 가능)"),
    variant: str = typer.Option("full", "--variant", help="모델 변형"),
    episodes: Optional[int] = typer.Option(None, "--episodes", "-e", min=1, help="시드별 학습 에피소드 예산"),
    out: Optional[str] = OUT_OPTION,
):
    """seen 클래스로만 학습하고 seen/unseen 목표에서 평가합니다 (unseen 무작위 기준선 포함).

    분할은 설정의 split.seen/unseen 을 쓰고, 없으면 split.seed 로 만듭니다.
    """
    with command_errors("zero-shot"):
        ws = open_workspace(config, out, {"train.episodes": episodes})
        table = build_table(ws)
        train_scenes, test_scenes = load_scene_split(ws)
        split = resolve_split(ws, train_scenes, test_scenes)
        document = {"seen": list(split.seen), "unseen": list(split.unseen)}
        ws.storage.put_file("reports/zero_shot_split.yaml", yaml.safe_dump(document, sort_keys=False).encode("utf-8"))
        logger.info(f"[CLI:zero-shot] 분할 seen={list(split.seen)}, unseen={list(split.unseen)}")

        context = build_context(ws, table, train_scenes, test_scenes)
        runner = ExperimentRunner(ws.config, context, ws.storage, ws.checkpoints)
        result = run_zero_shot(runner, split, seeds, variant)

        save_campaign(ws.storage, "zero_shot", result)
        typer.echo(result.table)
