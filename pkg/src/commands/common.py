"""
명령 공통 배선

설정 로딩/저장, 저장소·어댑터 조립, 씬/체크포인트 로딩, 종료 코드 변환을 모읍니다.
종료 코드: 0 성공, 2 설정/사용법 오류, 1 실행 오류.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator, Mapping, Optional

import typer
from dotenv import load_dotenv

from core.config import RunConfig, build_catalog, config_hash, dump_run_config, load_run_config
from core.domain.models import Checkpoint, ClassCatalog, EmbeddingTable, Scene, SplitSpec
from core.errors import ConfigError
from core.grad.params import ParamSet
from core.logger import logger
from core.model.tdanet import TdaNet
from core.services.embedding_service import EmbeddingService
from core.services.experiment_service import ExperimentContext
from core.services.parent_prior_service import parent_prob_table, targets_in
from core.services.zero_shot_service import explicit_split, zero_shot_split
from infra.adapters.binary_checkpoint_adapter import BinaryCheckpointAdapter, file_sha256
from infra.adapters.glove_text_adapter import GloveTextAdapter
from infra.adapters.pinhole_detector_adapter import PinholeDetectorAdapter
from infra.adapters.storage import LocalStorageAdapter
from infra.adapters.yaml_scene_repository_adapter import YamlSceneRepositoryAdapter

EXIT_RUNTIME = 1
EXIT_USAGE = 2
RESOLVED_CONFIG = "resolved_config.yaml"

CONFIG_OPTION = typer.Option(None, "--config", "-c", help="YAML 실행 설정 파일")
OUT_OPTION = typer.Option(None, "--out", "-o", help="출력 디렉토리 (기본값: 설정의 output_dir)")


@contextmanager
def command_errors(tag: str) -> Iterator[None]:
    """예외를 종료 코드로 바꿉니다 (ConfigError → 2, 그 밖의 예외 → 1)."""
    try:
        yield
    except typer.Exit:
        raise
    except ConfigError as e:
        logger.error(f"[CLI:{tag}] 설정 오류: {e}")
        typer.echo(f"[CLI:{tag}] 설정 오류: {e}", err=True)
        raise typer.Exit(code=EXIT_USAGE) from e
    except Exception as e:
        logger.error(f"[CLI:{tag}] 실행 실패: {type(e).__name__}: {e}")
        typer.echo(f"[CLI:{tag}] 실행 실패: {e}", err=True)
        raise typer.Exit(code=EXIT_RUNTIME) from e


def usage_error(tag: str, message: str) -> typer.Exit:
    typer.echo(f"[CLI:{tag}] {message}", err=True)
    return typer.Exit(code=EXIT_USAGE)


@dataclass
class Workspace:
    """한 명령 실행의 설정과 출력 저장소.

    Attributes:
        config (RunConfig): 검증된 설정.
        storage (LocalStorageAdapter): --out 디렉토리 저장소.
        catalog (ClassCatalog): 클래스 카탈로그.
    """
    config: RunConfig
    storage: LocalStorageAdapter
    catalog: ClassCatalog

    @property
    def scenes(self) -> YamlSceneRepositoryAdapter:
        return YamlSceneRepositoryAdapter(self.storage)

    @property
    def checkpoints(self) -> BinaryCheckpointAdapter:
        return BinaryCheckpointAdapter(self.storage)

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)


def open_workspace(config_path: Optional[str], out: Optional[str], overrides: Optional[Mapping[str, Any]] = None) -> Workspace:
    """.env 와 설정을 읽고, 출력 디렉토리에 resolved_config.yaml 을 씁니다.

    Raises:
        ConfigError: 설정이 잘못된 경우.
    """
    load_dotenv()
    config = load_run_config(config_path, {**(overrides or {}), "output_dir": out})
    catalog = build_catalog(config)
    storage = LocalStorageAdapter(base_path=config.output_dir)
    if not storage.put_file(RESOLVED_CONFIG, dump_run_config(config).encode("utf-8")):
        raise ConfigError(f"출력 디렉토리에 쓸 수 없습니다: {config.output_dir}")
    return Workspace(config=config, storage=storage, catalog=catalog)


def build_table(ws: Workspace) -> EmbeddingTable:
    return EmbeddingService(GloveTextAdapter()).build(ws.config.embedding, ws.catalog)


def load_scene_split(ws: Workspace) -> tuple[list[Scene], list[Scene]]:
    """매니페스트에 따라 (train, test) 씬을 읽습니다."""
    repo = ws.scenes
    manifest = repo.load_manifest()
    train = [repo.load_scene(scene_id) for scene_id in manifest["train"]]
    test = [repo.load_scene(scene_id) for scene_id in manifest["test"]]
    logger.info(f"[CLI] 씬 로드 (train={len(train)}, test={len(test)})")
    return train, test


def build_context(ws: Workspace, table: EmbeddingTable, train: list[Scene], test: list[Scene]) -> ExperimentContext:
    camera = ws.config.camera
    return ExperimentContext(
        catalog=ws.catalog,
        table=table,
        parent_table=parent_prob_table(train, ws.catalog, targets_in(train)),
        train_scenes=tuple(train),
        test_scenes=tuple(test),
        detector_factory=lambda: PinholeDetectorAdapter(camera),
    )


def resolve_split(ws: Workspace, train: list[Scene], test: list[Scene]) -> SplitSpec:
    """설정에 seen/unseen 목록이 있으면 검증해 쓰고, 없으면 시드로 분할합니다."""
    cfg = ws.config.split
    train_ids = [s.scene_id for s in train]
    test_ids = [s.scene_id for s in test]
    if cfg.seen is not None:
        return explicit_split(ws.catalog, cfg.seen, cfg.unseen, train_ids, test_ids)
    return zero_shot_split(ws.catalog, cfg.unseen_count, cfg.seed, train_ids, test_ids)


def _checkpoint_location(ws: Workspace, path: str) -> tuple[LocalStorageAdapter, str]:
    direct = Path(path)
    if direct.is_file():
        return LocalStorageAdapter(base_path=str(direct.parent)), direct.name
    return ws.storage, path


def load_checkpoint(ws: Workspace, path: str) -> tuple[Checkpoint, str]:
    """체크포인트와 파일 sha256 을 읽습니다.

    경로가 그대로 존재하면 그 파일을, 아니면 출력 디렉토리 기준 상대 경로로 찾습니다.

    Raises:
        CheckpointError: 파일이 없거나 손상된 경우.
        CheckpointMismatchError: 현재 설정과 해시가 다른 경우.
    """
    storage, name = _checkpoint_location(ws, path)
    checkpoint = BinaryCheckpointAdapter(storage).load(name, expected_hash=ws.config_hash)
    return checkpoint, file_sha256(storage, name) or ""


def load_params(ws: Workspace, model: TdaNet, path: str) -> tuple[ParamSet, str]:
    """체크포인트의 파라미터를 모델 구조에 채워 (파라미터, 파일 sha256) 을 반환합니다."""
    checkpoint, digest = load_checkpoint(ws, path)
    params = model.init_params(ws.config.model.seed)
    params.load_arrays(checkpoint.params)
    params.version = checkpoint.params_version
    return params, digest
