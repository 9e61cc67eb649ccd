"""
실행 설정 (RunConfig)

하나의 YAML 파일을 pydantic 모델로 검증합니다. 알 수 없는 키는 거부되며,
우선순위는 CLI 플래그 > 파일 > 기본값입니다.
"""
from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any, Literal, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.domain.catalog import default_catalog
from core.domain.models import ClassCatalog, ClassSpec
from core.errors import CatalogError, ConfigError

Variant = Literal["full", "no_ta", "no_sa", "no_ta_no_sa"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ClassSpecConfig(_Section):
    name: str
    prototype: str
    size_m: float = Field(gt=0)
    height_m: float = 0.0
    is_parent: bool = False
    parent: Optional[str] = None
    room_types: list[str] = Field(default_factory=list)


class EmbeddingConfig(_Section):
    mode: Literal["synthetic", "file"] = "synthetic"
    dim: int = Field(default=32, ge=2)
    noise: float = Field(default=0.1, ge=0.0)
    seed: int = 0
    path: Optional[str] = None

    @model_validator(mode="after")
    def _file_needs_path(self):
        if self.mode == "file" and not self.path:
            raise ValueError("embedding.mode=file 에는 embedding.path 가 필요합니다")
        return self


class GeneratorConfig(_Section):
    min_cells: int = Field(default=8, ge=3)
    max_cells: int = Field(default=12, ge=3)
    obstacle_prob: float = Field(default=0.0, ge=0.0, lt=1.0)
    parent_instances: tuple[int, int] = (1, 2)
    parent_min_separation_m: float = Field(default=0.5, ge=0.0)
    child_radius_m: float = Field(default=0.5, gt=0.0)
    co_occurrence_prob: float = Field(default=0.9, ge=0.0, le=1.0)
    max_attempts: int = Field(default=50, ge=1)
    train_ratio: float = Field(default=0.8, gt=0.0, lt=1.0)
    room_types: Optional[list[str]] = None

    @model_validator(mode="after")
    def _ranges(self):
        if self.min_cells > self.max_cells:
            raise ValueError("generator.min_cells 가 max_cells 보다 큽니다")
        low, high = self.parent_instances
        if not 1 <= low <= high:
            raise ValueError(f"generator.parent_instances 범위가 잘못되었습니다: {self.parent_instances}")
        return self


class CameraConfig(_Section):
    hfov_deg: float = Field(default=90.0, gt=0.0, lt=180.0)
    vfov_deg: float = Field(default=90.0, gt=0.0, lt=180.0)
    max_range_m: float = Field(default=5.0, gt=0.0)
    drop_prob: float = Field(default=0.0, ge=0.0, lt=1.0)
    jitter_sigma: float = Field(default=0.0, ge=0.0)


class ModelConfig(_Section):
    d_att: int = Field(default=16, ge=1)
    d_l1: int = Field(default=32, ge=1)
    d_sa: int = Field(default=32, ge=1)
    ffn: int = Field(default=64, ge=1)
    hidden: int = Field(default=64, ge=1)
    dropout: float = Field(default=0.25, ge=0.0, lt=1.0)
    variant: Variant = "full"
    seed: int = 0

    @classmethod
    def large(cls, **overrides) -> "ModelConfig":
        """E=300 임베딩에 맞춘 대형 프리셋."""
        dims = dict(d_att=256, d_l1=512, d_sa=512, ffn=512, hidden=512)
        dims.update(overrides)
        return cls(**dims)


class TrainConfig(_Section):
    gamma: float = Field(default=0.99, gt=0.0, le=1.0)
    entropy_weight: float = Field(default=0.01, ge=0.0)
    value_weight: float = Field(default=0.5, ge=0.0)
    horizon: int = Field(default=30, ge=1)
    workers: int = Field(default=1, ge=1)
    episodes: int = Field(default=1000, ge=1)
    max_steps: int = Field(default=100, ge=1)
    lr: float = Field(default=1e-4, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    clip: float = Field(default=40.0, gt=0.0)
    seed: int = 0
    log_every: int = Field(default=10, ge=1)
    checkpoint_every: int = Field(default=500, ge=0)
    eval_every: int = Field(default=0, ge=0)
    eval_episodes: int = Field(default=20, ge=1)


class EvalConfig(_Section):
    episodes_per_bucket: int = Field(default=250, ge=1)
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    greedy: bool = True
    max_steps: int = Field(default=100, ge=1)


class SplitConfig(_Section):
    seen: Optional[list[str]] = None
    unseen: Optional[list[str]] = None
    unseen_count: int = Field(default=3, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _explicit_pair(self):
        if (self.seen is None) != (self.unseen is None):
            raise ValueError("split.seen 과 split.unseen 은 함께 지정해야 합니다")
        return self


class RunConfig(_Section):
    catalog: Optional[list[ClassSpecConfig]] = None
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    generator: GeneratorConfig = Field(default_factory=GeneratorConfig)
    camera: CameraConfig = Field(default_factory=CameraConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    output_dir: str = "output"


def _set_dotted(tree: dict, dotted: str, value: Any) -> None:
    node = tree
    keys = dotted.split(".")
    for key in keys[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            child = {}
            node[key] = child
        node = child
    node[keys[-1]] = value


def load_run_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """YAML 파일과 플래그 오버라이드로 RunConfig 를 만듭니다.

    Args:
        path (Optional[str]): 설정 파일 경로. None 이면 기본값만 사용합니다.
        overrides (Optional[Mapping[str, Any]]): 'train.workers' 같은 점 표기 키 → 값. None 값은 무시합니다.

    Returns:
        RunConfig: 검증된 설정.

    Raises:
        ConfigError: 파일이 없거나, YAML 이 잘못되었거나, 검증에 실패한 경우.
    """
    raw: dict = {}
    if path:
        file_path = Path(path)
        if not file_path.exists():
            raise ConfigError(f"설정 파일이 없습니다: {path}")
        try:
            loaded = yaml.safe_load(file_path.read_text(encoding="utf-8"))
        except yaml.YAMLError as e:
            raise ConfigError(f"설정 파일 파싱 실패 ({path}): {e}") from e
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"설정 파일의 최상위는 매핑이어야 합니다: {path}")
        raw = loaded or {}

    for key, value in (overrides or {}).items():
        if value is not None:
            _set_dotted(raw, key, value)

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"설정 검증 실패:\n{e}") from e


def dump_run_config(config: RunConfig) -> str:
    """기본값이 모두 펼쳐진 설정을 YAML 문자열로 직렬화합니다."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False, allow_unicode=True)


def build_catalog(config: RunConfig) -> ClassCatalog:
    if config.catalog is None:
        return default_catalog()
    try:
        return ClassCatalog(tuple(
            ClassSpec(
                name=c.name,
                prototype=c.prototype,
                size_m=c.size_m,
                height_m=c.height_m,
                is_parent=c.is_parent,
                parent=c.parent,
                room_types=tuple(c.room_types),
            )
            for c in config.catalog
        ))
    except CatalogError as e:
        raise ConfigError(f"카탈로그 설정 오류: {e}") from e


def config_hash(config: RunConfig) -> str:
    """파라미터의 의미를 결정하는 설정(카탈로그, 임베딩, 모델 차원/변형)의 sha256 hex.

    학습 길이/시드 같은 실행 옵션은 포함하지 않으므로 재개 시 바꿀 수 있습니다.
    """
    relevant = {
        "catalog": [c.model_dump(mode="json") for c in config.catalog] if config.catalog is not None else None,
        "embedding": config.embedding.model_dump(mode="json"),
        "model": config.model.model_dump(mode="json", exclude={"seed"}),
    }
    text = yaml.safe_dump(relevant, sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
