import json

import pytest
import yaml
from typer.testing import CliRunner

from src.cli import app

runner = CliRunner()

SMOKE_CONFIG = {
    "embedding": {"dim": 8},
    "generator": {"min_cells": 6, "max_cells": 7},
    "model": {"d_att": 4, "d_l1": 8, "d_sa": 8, "ffn": 8, "hidden": 8},
    "train": {"episodes": 4, "max_steps": 8, "horizon": 4, "log_every": 2, "checkpoint_every": 0},
    "eval": {"episodes_per_bucket": 2, "max_steps": 8},
}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "smoke.yaml"
    path.write_text(yaml.safe_dump(SMOKE_CONFIG), encoding="utf-8")
    return str(path)


def _gen(config_file, out, count="5", seed="3"):
    return runner.invoke(app, ["gen-scenes", "-c", config_file, "--count", count, "--seed", seed, "--out", str(out)])


def test_cli_help():
    """CLI 도움말에 모든 명령이 나오는지 확인"""
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    assert "TDANet 물체 탐색 에이전트 CLI" in result.stdout
    for command in ("gen-scenes", "train", "eval", "inspect", "zero-shot", "ablation"):
        assert command in result.stdout


def test_cli_gen_scenes_writes_disjoint_manifest(tmp_path, config_file):
    """씬 파일과 겹치지 않는 train/test 매니페스트, resolved_config.yaml 이 생성되는지 확인"""
    # Given
    out = tmp_path / "run"

    # When
    result = _gen(config_file, out)

    # Then
    assert result.exit_code == 0, result.output
    manifest = yaml.safe_load((out / "scenes" / "manifest.yaml").read_text(encoding="utf-8"))
    assert len(manifest["train"]) == 4
    assert len(manifest["test"]) == 1
    assert not set(manifest["train"]) & set(manifest["test"])
    assert len(list((out / "scenes").glob("scene_*.yaml"))) == 5
    assert (out / "resolved_config.yaml").exists()


def test_cli_gen_scenes_is_deterministic(tmp_path, config_file):
    """같은 설정과 시드면 씬 파일 바이트가 같습니다"""
    # When
    first = _gen(config_file, tmp_path / "a")
    second = _gen(config_file, tmp_path / "b")

    # Then
    assert first.exit_code == 0 and second.exit_code == 0
    for path in sorted((tmp_path / "a" / "scenes").glob("*.yaml")):
        assert path.read_bytes() == (tmp_path / "b" / "scenes" / path.name).read_bytes()


def test_cli_bad_config_exits_with_usage_code(tmp_path):
    """존재하지 않는 설정 파일과 알 수 없는 키는 종료 코드 2"""
    # Given
    unknown = tmp_path / "unknown.yaml"
    unknown.write_text("train:\n  not_a_key: 1\n", encoding="utf-8")

    # When
    missing = runner.invoke(app, ["gen-scenes", "-c", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o")])
    invalid = runner.invoke(app, ["gen-scenes", "-c", str(unknown), "--out", str(tmp_path / "o")])

    # Then
    assert missing.exit_code == 2
    assert invalid.exit_code == 2


def test_cli_eval_requires_checkpoint_or_baseline(tmp_path, config_file):
    """--checkpoint 도 --baseline 도 없으면 종료 코드 2"""
    result = runner.invoke(app, ["eval", "-c", config_file, "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_cli_eval_random_baseline_writes_report(tmp_path, config_file):
    """무작위 기준선 평가가 리포트와 요약 표를 만드는지 확인"""
    # Given
    out = tmp_path / "run"
    assert _gen(config_file, out).exit_code == 0

    # When
    result = runner.invoke(app, ["eval", "-c", config_file, "--baseline", "random", "--out", str(out)])

    # Then
    assert result.exit_code == 0, result.output
    assert "random" in result.stdout
    assert "SPL L>=5" in result.stdout
    report = yaml.safe_load((out / "reports" / "eval_random_all.yaml").read_text(encoding="utf-8"))
    assert set(report) == {"buckets", "per_class", "per_room", "provenance"}
    assert report["provenance"]["policy"] == "random"


def test_cli_eval_missing_checkpoint_exits_with_runtime_code(tmp_path, config_file):
    """없는 체크포인트는 종료 코드 1"""
    # Given
    out = tmp_path / "run"
    assert _gen(config_file, out).exit_code == 0

    # When
    result = runner.invoke(app, ["eval", "-c", config_file, "--checkpoint", "checkpoints/missing.bin", "--out", str(out)])

    # Then
    assert result.exit_code == 1


def test_cli_train_resume_eval_and_inspect(tmp_path, config_file):
    """학습 → 재개 → 체크포인트 평가 → 어텐션 덤프까지 한 번에 확인"""
    # Given
    out = tmp_path / "run"
    assert _gen(config_file, out).exit_code == 0

    # When: 학습
    trained = runner.invoke(app, ["train", "-c", config_file, "--out", str(out)])

    # Then
    assert trained.exit_code == 0, trained.output
    assert "episodes=4" in trained.stdout
    checkpoint = out / "checkpoints" / "final.bin"
    assert checkpoint.exists()
    records = [json.loads(line) for line in (out / "logs" / "metrics.jsonl").read_text(encoding="utf-8").splitlines()]
    assert records

    # When: 예산을 늘려 재개
    resumed = runner.invoke(
        app, ["train", "-c", config_file, "--resume", "checkpoints/final.bin", "--episodes", "6", "--out", str(out)]
    )

    # Then
    assert resumed.exit_code == 0, resumed.output
    assert "episodes=6" in resumed.stdout
    episodes = [
        json.loads(line)["episode"]
        for line in (out / "logs" / "metrics.jsonl").read_text(encoding="utf-8").splitlines()
    ]
    assert episodes == sorted(set(episodes))
    assert episodes[-1] == 6

    # When: 체크포인트와 기준선 평가
    evaluated = runner.invoke(
        app,
        ["eval", "-c", config_file, "--checkpoint", str(checkpoint), "--baseline", "random", "--out", str(out)],
    )

    # Then
    assert evaluated.exit_code == 0, evaluated.output
    assert "full" in evaluated.stdout and "random" in evaluated.stdout
    report = yaml.safe_load((out / "reports" / "eval_full_all.yaml").read_text(encoding="utf-8"))
    assert len(report["provenance"]["checkpoint_sha256"]) == 64

    # When: 어텐션 덤프
    scene = yaml.safe_load((out / "scenes" / "manifest.yaml").read_text(encoding="utf-8"))["train"][0]
    scene_doc = yaml.safe_load((out / "scenes" / f"{scene}.yaml").read_text(encoding="utf-8"))
    target = next(o["class"] for o in scene_doc["objects"] if not o["is_parent"])
    inspected = runner.invoke(
        app,
        ["inspect", "-c", config_file, "--checkpoint", "checkpoints/final.bin", "--scene", scene, "--target", target,
         "--out", str(out)],
    )

    # Then
    assert inspected.exit_code == 0, inspected.output
    dump = yaml.safe_load((out / "dumps" / f"{scene}_{target}.yaml").read_text(encoding="utf-8"))
    assert dump["target"] == target
    assert dump["variant"] == "full"
    assert (out / "dumps" / f"{scene}_{target}.svg").read_bytes().lstrip().startswith(b"<?xml")


def test_cli_inspect_unknown_scene_exits_with_usage_code(tmp_path, config_file):
    """없는 씬 id 는 종료 코드 2"""
    # Given
    out = tmp_path / "run"
    assert _gen(config_file, out).exit_code == 0

    # When
    result = runner.invoke(
        app,
        ["inspect", "-c", config_file, "--checkpoint", "x.bin", "--scene", "scene_9999", "--target", "Mug",
         "--out", str(out)],
    )

    # Then
    assert result.exit_code == 2


def test_cli_train_single_worker_rerun_is_byte_identical(tmp_path, config_file):
    """단일 워커 고정 시드 학습을 두 번 돌리면 메트릭 로그와 체크포인트가 같습니다"""
    # Given
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert _gen(config_file, out).exit_code == 0

    # When
    results = [runner.invoke(app, ["train", "-c", config_file, "--workers", "1", "--out", str(out)]) for out in outs]

    # Then
    assert all(r.exit_code == 0 for r in results)
    first, second = ((out / "logs" / "metrics.jsonl").read_bytes() for out in outs)
    assert first == second
    assert (outs[0] / "checkpoints" / "final.bin").read_bytes() == (outs[1] / "checkpoints" / "final.bin").read_bytes()


def test_cli_unknown_log_level_exits_with_usage_code(tmp_path):
    """잘못된 --log-level 은 종료 코드 2"""
    result = runner.invoke(app, ["--log-level", "verbose", "gen-scenes", "--out", str(tmp_path)])
    assert result.exit_code == 2
