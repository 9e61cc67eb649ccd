"""
클래스 단어 임베딩 서비스

설정에 따라 텍스트 임베딩 파일(EmbeddingSourcePort)을 읽거나, 의미 클러스터 구조가 통제된
합성 임베딩을 결정적으로 생성합니다.
"""
from __future__ import annotations

from itertools import combinations
from typing import Optional

import numpy as np

from core.config import EmbeddingConfig
from core.domain.models import ClassCatalog, EmbeddingTable
from core.errors import ConfigError, PrototypeCapacityError, UnknownClassError
from core.logger import logger
from core.ports.embedding_source_port import EmbeddingSourcePort


def synth_embeddings(catalog: ClassCatalog, dim: int, noise: float, seed: int) -> EmbeddingTable:
    """프로토타입 + 가우시안 노이즈로 클래스 임베딩을 생성합니다.

    프로토타입은 가우시안 행렬의 QR 분해로 얻은 정규 직교 벡터입니다.
    클래스 벡터는 normalize(prototype + noise · N(0, I) / √dim) 이므로 noise 는 노이즈 벡터의 기대 노름입니다.

    Args:
        catalog (ClassCatalog): 클래스 카탈로그 (등록 순서대로 난수를 소비).
        dim (int): 임베딩 차원 E (2 이상).
        noise (float): 노이즈 크기 σ (0 이상).
        seed (int): 난수 시드.

    Returns:
        EmbeddingTable: 모든 카탈로그 클래스를 담은 테이블.

    Raises:
        PrototypeCapacityError: 프로토타입 수가 dim 보다 많은 경우.
    """
    if dim < 2:
        raise ValueError(f"임베딩 차원은 2 이상이어야 합니다: {dim}")
    if noise < 0:
        raise ValueError(f"noise 는 0 이상이어야 합니다: {noise}")

    prototypes = catalog.prototypes()
    if len(prototypes) > dim:
        raise PrototypeCapacityError(
            f"프로토타입 {len(prototypes)}개를 {dim}차원에서 직교화할 수 없습니다"
        )

    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, len(prototypes))))
    q = q * np.sign(np.diag(r))
    basis = {name: q[:, k] for k, name in enumerate(prototypes)}

    vectors: dict[str, np.ndarray] = {}
    for spec in catalog.classes:
        vec = basis[spec.prototype] + noise * rng.standard_normal(dim) / np.sqrt(dim)
        vectors[spec.name] = vec / np.linalg.norm(vec)
    return EmbeddingTable(dim=dim, vectors=vectors)


def embedding_of(table: EmbeddingTable, class_name: str) -> np.ndarray:
    """저장된 벡터를 그대로 반환합니다 (읽기 전용 배열)."""
    try:
        return table.vectors[class_name]
    except KeyError:
        raise UnknownClassError(f"임베딩 테이블에 없는 클래스: {class_name}") from None


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def separation_margin(table: EmbeddingTable, catalog: ClassCatalog) -> float:
    """(같은 프로토타입 내 최소 코사인) − (다른 프로토타입 간 최대 코사인).

    양수이면 모든 클래스의 코사인 최근접 이웃이 같은 프로토타입 클래스입니다.
    """
    within, cross = 1.0, -1.0
    for a, b in combinations(catalog.classes, 2):
        cos = _cosine(embedding_of(table, a.name), embedding_of(table, b.name))
        if a.prototype == b.prototype:
            within = min(within, cos)
        else:
            cross = max(cross, cos)
    return within - cross


def nearest_class(table: EmbeddingTable, class_name: str) -> str:
    """코사인 유사도 기준 가장 가까운 다른 클래스."""
    query = embedding_of(table, class_name)
    candidates = [name for name in table.classes if name != class_name]
    return max(candidates, key=lambda name: _cosine(query, table.vectors[name]))


class EmbeddingService:
    """설정에 맞는 임베딩 테이블을 만듭니다.

    Attributes:
        source (Optional[EmbeddingSourcePort]): 텍스트 임베딩 파일 소스 (file 모드에서 필요).
    """

    def __init__(self, source: Optional[EmbeddingSourcePort] = None):
        self.source = source

    def build(self, config: EmbeddingConfig, catalog: ClassCatalog) -> EmbeddingTable:
        if config.mode == "file":
            if self.source is None:
                raise ConfigError("file 모드 임베딩에는 EmbeddingSourcePort 가 필요합니다")
            table = self.source.load(config.path, catalog.names)
            logger.info(f"[Service:Embedding] 텍스트 임베딩 로드 완료 (E={table.dim}, classes={len(table.vectors)})")
        else:
            table = synth_embeddings(catalog, config.dim, config.noise, config.seed)
            logger.info(f"[Service:Embedding] 합성 임베딩 생성 완료 (E={table.dim}, σ={config.noise}, seed={config.seed})")

        margin = separation_margin(table, catalog)
        if margin <= 0:
            logger.warning(f"[Service:Embedding] 프로토타입 분리 마진이 양수가 아닙니다 ({margin:.4f}). 제로샷 전이가 보장되지 않습니다.")
        else:
            logger.debug(f"[Service:Embedding] 프로토타입 분리 마진: {margin:.4f}")
        return table
