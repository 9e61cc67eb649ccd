from typing import List, Optional

import typer

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
    usage_error,
)
from core.services.campaign_service import ABLATION_VARIANTS, run_ablation
from core.services.experiment_service import ExperimentRunner


def ablation(
    config: Optional[str] = CONFIG_OPTION,
    variants: List[str] = typer.Option(list(ABLATION_VARIANTS), "--variant", "-v", help="비교할 모델 변형 (여러 번 지정 가능)"),
    seeds: List[int] = typer.Option([0], "--seed", "-s", help="학습 시드 (여러 번 지정 가능)"),
    zero_shot: bool = typer.Option(False, "--zero-shot", help="seen/unseen 분할로 학습/평가"),
    episodes: Optional[int] = typer.Option(None, "--episodes", "-e", min=1, help="실행별 학습 에피소드 예산"),
    out: Optional[str] = OUT_OPTION,
):
    """모델 변형 × 시드를 학습/평가해 평균 ± 표준오차 비교 표를 만듭니다."""
    tag = "ablation"
    unknown = [v for v in variants if v not in ABLATION_VARIANTS]
    if unknown:
        raise usage_error(tag, f"알 수 없는 변형: {unknown} (가능: {', '.join(ABLATION_VARIANTS)})")

    with command_errors(tag):
        ws = open_workspace(config, out, {"train.episodes": episodes})
        table = build_table(ws)
        train_scenes, test_scenes = load_scene_split(ws)
        split = resolve_split(ws, train_scenes, test_scenes) if zero_shot else None

        context = build_context(ws, table, train_scenes, test_scenes)
        runner = ExperimentRunner(ws.config, context, ws.storage, ws.checkpoints)
        result = run_ablation(runner, variants, seeds, split)

        save_campaign(ws.storage, tag, result)
        typer.echo(result.table)
