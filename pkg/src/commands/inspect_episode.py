from typing import Optional

import numpy as np
import typer
import yaml

from commands.common import (
    CONFIG_OPTION,
    OUT_OPTION,
    build_context,
    build_table,
    command_errors,
    load_params,
    load_scene_split,
    open_workspace,
    usage_error,
)
from core.domain.models import AgentPose, EpisodeSpec
from core.logger import logger
from core.model.tdanet import TdaNet
from core.services.attention_dump_service import AttentionDumpService
from core.services.experiment_service import ExperimentRunner
from core.services.navigation_env_service import sample_start
from infra.adapters.svg_render_adapter import SvgRenderAdapter


def parse_start(text: str) -> AgentPose:
    """'i,j,heading' 문자열 → AgentPose (heading 은 45 의 배수)."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"--start 는 'i,j,heading' 형식이어야 합니다: {text}")
    i, j, heading = (int(p) for p in parts)
    if heading % 45 != 0:
        raise ValueError(f"heading 은 45 의 배수여야 합니다: {heading}")
    return AgentPose(i, j, heading=heading % 360, pitch=0)


def inspect(
    config: Optional[str] = CONFIG_OPTION,
    checkpoint: str = typer.Option(..., "--checkpoint", "-k", help="체크포인트 경로"),
    scene: str = typer.Option(..., "--scene", help="씬 id"),
    target: str = typer.Option(..., "--target", "-t", help="목표 클래스"),
    start: Optional[str] = typer.Option(None, "--start", help="시작 자세 'i,j,heading' (생략 시 eval.seed 로 샘플링)"),
    render: bool = typer.Option(True, "--render/--no-render", help="궤적 SVG 생성 여부"),
    out: Optional[str] = OUT_OPTION,
):
    """에피소드 하나를 greedy 로 실행해 어텐션 덤프(YAML)와 궤적 SVG 를 dumps/ 에 저장합니다."""
    tag = "inspect"
    try:
        pose = parse_start(start) if start is not None else None
    except ValueError as e:
        raise usage_error(tag, str(e))

    with command_errors(tag):
        ws = open_workspace(config, out)
        table = build_table(ws)
        train_scenes, test_scenes = load_scene_split(ws)
        scenes = {s.scene_id: s for s in train_scenes + test_scenes}
        if scene not in scenes:
            raise usage_error(tag, f"씬을 찾을 수 없습니다: {scene}")
        chosen = scenes[scene]
        if target not in chosen.target_classes():
            raise usage_error(tag, f"씬 {scene} 에 목표 {target} 가 없습니다")
        if pose is not None and not chosen.is_free(pose.i, pose.j):
            raise usage_error(tag, f"시작 셀이 막혀 있거나 범위 밖입니다: ({pose.i}, {pose.j})")
        if pose is None:
            pose = sample_start(chosen, np.random.default_rng(ws.config.eval.seed))

        context = build_context(ws, table, train_scenes, test_scenes)
        env = ExperimentRunner(ws.config, context, ws.storage).env_factory()()
        model = TdaNet(ws.config.model, table)
        params, _ = load_params(ws, model, checkpoint)

        service = AttentionDumpService(env, SvgRenderAdapter() if render else None, ws.config.camera)
        dump = service.dump(model, params, EpisodeSpec(chosen, pose, target), ws.config.eval.max_steps)

        stem = f"dumps/{scene}_{target}"
        document = yaml.safe_dump(dump.document, sort_keys=False, allow_unicode=True)
        ws.storage.put_file(f"{stem}.yaml", document.encode("utf-8"))
        if dump.render is not None:
            ws.storage.put_file(f"{stem}.svg", dump.render)
        logger.info(f"[CLI:inspect] 덤프 저장: {stem}")

        status = "성공" if dump.result.success else "실패"
        typer.echo(
            f"{scene}/{target}: {status}, 행동 {dump.result.actions_taken}회 (L={dump.result.optimal_length}), "
            f"파라미터 {dump.num_params}개, 스텝당 {dump.mean_latency_ms:.3f} ms"
        )
