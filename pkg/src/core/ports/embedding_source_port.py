"""
단어 임베딩 소스 포트 인터페이스
"""
from abc import ABC, abstractmethod
from typing import Sequence

from core.domain.models import EmbeddingTable


class EmbeddingSourcePort(ABC):
    """사전 학습된 텍스트 임베딩 파일을 읽고 쓰는 포트."""

    @abstractmethod
    def load(self, path: str, wanted: Sequence[str]) -> EmbeddingTable:
        """요청한 클래스만 담은 임베딩 테이블을 로드합니다.

        Args:
            path (str): 임베딩 파일 경로.
            wanted (Sequence[str]): 필요한 클래스 이름.

        Returns:
            EmbeddingTable: 정확히 wanted 클래스만 포함한 테이블.
        """
        pass

    @abstractmethod
    def save(self, table: EmbeddingTable, path: str) -> None:
        """테이블을 같은 텍스트 형식으로 저장합니다 (한 줄에 클래스 하나)."""
        pass
