"""
네트워크 입력 구성

검출 목록 → 검출 객체 행렬 M_d (n × (3+E)), 목표 클래스 → 목표 벡터 V_t (1 × (3+E)).
각 행은 [x, y, S, w] 이며 w 는 클래스 단어 임베딩입니다.
"""
from typing import Sequence

import numpy as np

from core.domain.models import Detection, EmbeddingTable
from core.grad.tensor import Tensor
from core.services.embedding_service import embedding_of

# 목표 객체가 화면 중앙에 화면 면적의 1/4 크기로 보이는 상태
TARGET_STATE = (0.5, 0.5, 0.25)


def feature_width(table: EmbeddingTable) -> int:
    return 3 + table.dim


def build_detected_matrix(detections: Sequence[Detection], table: EmbeddingTable) -> Tensor:
    """검출 목록으로 M_d 를 만듭니다. 검출이 없으면 0 으로 채운 한 행을 반환합니다.

    Args:
        detections (Sequence[Detection]): 검출 목록 (입력 순서 유지).
        table (EmbeddingTable): 클래스 임베딩.

    Returns:
        Tensor: n × (3+E) 행렬 (n >= 1).
    """
    width = feature_width(table)
    if not detections:
        return Tensor(np.zeros((1, width)))

    rows = np.empty((len(detections), width))
    for r, det in enumerate(detections):
        rows[r, 0] = det.x
        rows[r, 1] = det.y
        rows[r, 2] = det.area
        rows[r, 3:] = embedding_of(table, det.class_name)
    return Tensor(rows)


def build_target_vector(target: str, table: EmbeddingTable) -> Tensor:
    row = np.empty((1, feature_width(table)))
    row[0, :3] = TARGET_STATE
    row[0, 3:] = embedding_of(table, target)
    return Tensor(row)
