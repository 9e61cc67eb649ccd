"""
다중 시드 캠페인 (ablation / zero-shot)

변형 × 시드마다 ExperimentRunner 로 학습/평가한 결과를 레코드로 모으고,
pandas 로 평균 ± 표준오차 표를 만듭니다.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Protocol, Sequence

import numpy as np
import pandas as pd
from tabulate import tabulate

from core.domain.models import EvalReport, SplitSpec
from core.logger import logger
from core.services.evaluation_service import BUCKETS

ABLATION_VARIANTS = ("full", "no_ta", "no_sa", "no_ta_no_sa")
RANDOM_ROW = "random"


class ExperimentRunnerLike(Protocol):
    def run(self, variant: str, seed: int, split: Optional[SplitSpec] = None) -> dict[str, EvalReport]: ...

    def random_baseline(self, targets: Optional[tuple[str, ...]] = None) -> EvalReport: ...


@dataclass(frozen=True)
class CampaignRecord:
    """(변형, 시드, 그룹, 버킷) 하나의 평가 결과. 빈 버킷은 sr/spl 이 NaN 입니다."""
    variant: str
    seed: int
    group: str
    bucket: str
    sr: float
    spl: float
    episodes: int


@dataclass
class CampaignResult:
    """캠페인 결과.

    Attributes:
        records (pd.DataFrame): CampaignRecord 행.
        summary (pd.DataFrame): (variant, group, bucket) 별 평균/표준오차.
        table (str): 행 = 변형, 열 = 그룹/버킷별 SR·SPL 인 정렬된 표 ("평균 ± 표준오차").
    """
    records: pd.DataFrame
    summary: pd.DataFrame
    table: str


def records_from(variant: str, seed: int, reports: dict[str, EvalReport]) -> list[CampaignRecord]:
    rows = []
    for group, report in reports.items():
        for name, _ in BUCKETS:
            stats = report.buckets[name]
            sr, spl = (np.nan, np.nan) if stats.is_empty else (stats.sr, stats.spl)
            rows.append(CampaignRecord(variant, seed, group, name, sr, spl, stats.episodes))
    return rows


def summarize(records: pd.DataFrame) -> pd.DataFrame:
    """시드에 대한 평균과 표준오차 (시드 1개면 표준오차 0). 빈 버킷(NaN)은 제외합니다."""
    grouped = records.groupby(["variant", "group", "bucket"], sort=False)
    summary = grouped.agg(
        sr_mean=("sr", "mean"),
        sr_stderr=("sr", "sem"),
        spl_mean=("spl", "mean"),
        spl_stderr=("spl", "sem"),
        seeds=("seed", "nunique"),
    ).reset_index()
    single = summary["seeds"] < 2
    summary.loc[single, ["sr_stderr", "spl_stderr"]] = summary.loc[single, ["sr_stderr", "spl_stderr"]].fillna(0.0)
    return summary


def _fmt(mean: float, stderr: float) -> str:
    if pd.isna(mean):
        return "-"
    return f"{mean:.1f} ± {0.0 if pd.isna(stderr) else stderr:.1f}"


def format_table(summary: pd.DataFrame, groups: Sequence[str]) -> str:
    """변형별 한 행. 그룹이 하나면 열은 SR/SPL × 버킷, 여러 개면 그룹 이름이 앞에 붙습니다."""
    prefix = len(groups) > 1
    columns = [
        (group, bucket, metric)
        for group in groups
        for bucket, _ in BUCKETS
        for metric in ("SR", "SPL")
    ]
    headers = ["Variant"] + [f"{g} {m} {b}" if prefix else f"{m} {b}" for g, b, m in columns]

    indexed = summary.set_index(["variant", "group", "bucket"])
    rows = []
    for variant in dict.fromkeys(summary["variant"]):
        row = [variant]
        for group, bucket, metric in columns:
            key = (variant, group, bucket)
            if key not in indexed.index:
                row.append("")
                continue
            entry = indexed.loc[key]
            field = metric.lower()
            row.append(_fmt(entry[f"{field}_mean"], entry[f"{field}_stderr"]))
        rows.append(row)
    return tabulate(rows, headers=headers, tablefmt="github")


def _finish(records: list[CampaignRecord], groups: Sequence[str]) -> CampaignResult:
    frame = pd.DataFrame([asdict(r) for r in records])
    summary = summarize(frame)
    return CampaignResult(records=frame, summary=summary, table=format_table(summary, groups))


def run_ablation(
    runner: ExperimentRunnerLike,
    variants: Sequence[str] = ABLATION_VARIANTS,
    seeds: Sequence[int] = (0,),
    split: Optional[SplitSpec] = None,
) -> CampaignResult:
    """변형 × 시드마다 학습/평가해 비교 표를 만듭니다.

    분할이 주어지면 seen/unseen 그룹별 SR/SPL 열을 만듭니다.

    Raises:
        ValueError: 시드나 변형이 비어 있는 경우.
    """
    if not seeds:
        raise ValueError("시드가 하나 이상 필요합니다")
    if not variants:
        raise ValueError("변형이 하나 이상 필요합니다")

    records: list[CampaignRecord] = []
    for variant in variants:
        for seed in seeds:
            records += records_from(variant, seed, runner.run(variant, seed, split))
            logger.info(f"[Service:Campaign] ablation {variant}/seed_{seed} 완료")

    groups = ("all",) if split is None else ("seen", "unseen")
    return _finish(records, groups)


def run_zero_shot(
    runner: ExperimentRunnerLike,
    split: SplitSpec,
    seeds: Sequence[int] = (0,),
    variant: str = "full",
) -> CampaignResult:
    """seen 클래스로만 학습한 모델을 seen/unseen 목표에서 평가하고, unseen 목표의 무작위 기준선을 함께 기록합니다."""
    if not seeds:
        raise ValueError("시드가 하나 이상 필요합니다")

    records: list[CampaignRecord] = []
    for seed in seeds:
        records += records_from(variant, seed, runner.run(variant, seed, split))
        logger.info(f"[Service:Campaign] zero-shot {variant}/seed_{seed} 완료")

    baseline = runner.random_baseline(split.unseen)
    records += records_from(RANDOM_ROW, 0, {"unseen": baseline})
    return _finish(records, ("seen", "unseen"))
