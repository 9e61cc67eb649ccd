from typing import Optional

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
    resolve_split,
    usage_error,
)
from core.domain.models import EvalReport
from core.logger import logger
from core.model.tdanet import TdaNet
from core.services.evaluation_service import EvaluationService, report_to_document, summary_table
from core.services.experiment_service import ExperimentRunner, split_label

SPLITS = ("all", "seen", "unseen")
BASELINES = ("random",)


def evaluate(
    config: Optional[str] = CONFIG_OPTION,
    checkpoint: Optional[str] = typer.Option(None, "--checkpoint", "-k", help="평가할 체크포인트 경로"),
    split: str = typer.Option("all", "--split", help="평가 목표 분할 (all, seen, unseen)"),
    baseline: Optional[str] = typer.Option(None, "--baseline", "-b", help="기준선 정책 (random)"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", min=1, help="평가 워커 수 (설정 eval.workers 덮어씀)"),
    out: Optional[str] = OUT_OPTION,
):
    """평가 씬에서 SR/SPL 을 L>=1, L>=5 버킷별로 계산합니다.

    체크포인트와 기준선을 함께 주면 두 결과를 한 표로 비교합니다.
    리포트는 reports/eval_{정책}_{분할}.yaml 로 저장됩니다.
    """
    tag = "eval"
    if split not in SPLITS:
        raise usage_error(tag, f"--split 은 {', '.join(SPLITS)} 중 하나여야 합니다: {split}")
    if baseline is not None and baseline not in BASELINES:
        raise usage_error(tag, f"지원하지 않는 기준선입니다: {baseline}")
    if checkpoint is None and baseline is None:
        raise usage_error(tag, "--checkpoint 또는 --baseline 중 하나가 필요합니다")

    with command_errors(tag):
        ws = open_workspace(config, out, {"eval.workers": workers})
        table = build_table(ws)
        train_scenes, test_scenes = load_scene_split(ws)
        if not test_scenes:
            raise ValueError("평가 씬이 없습니다 (매니페스트의 test 가 비어 있음)")
        context = build_context(ws, table, train_scenes, test_scenes)
        runner = ExperimentRunner(ws.config, context, ws.storage)
        service = EvaluationService(runner.env_factory(), ws.config.eval)

        targets = None
        label = "all"
        if split != "all":
            spec = resolve_split(ws, train_scenes, test_scenes)
            targets = spec.seen if split == "seen" else spec.unseen
            label = split_label(spec)
        base = {"config_hash": ws.config_hash, "split": label, "scenes": ",".join(s.scene_id for s in test_scenes)}

        reports: dict[str, EvalReport] = {}
        if checkpoint is not None:
            model = TdaNet(ws.config.model, table)
            params, digest = load_params(ws, model, checkpoint)
            provenance = {**base, "variant": model.variant, "checkpoint_sha256": digest}
            reports[model.variant] = service.evaluate(model, params, test_scenes, targets, provenance)
        if baseline is not None:
            reports[baseline] = service.random_baseline(test_scenes, targets, base)

        for name, report in reports.items():
            path = f"reports/eval_{name}_{split}.yaml"
            document = yaml.safe_dump(report_to_document(report), sort_keys=False, allow_unicode=True)
            ws.storage.put_file(path, document.encode("utf-8"))
            logger.info(f"[CLI:eval] 리포트 저장: {path}")

        typer.echo(summary_table(reports))
