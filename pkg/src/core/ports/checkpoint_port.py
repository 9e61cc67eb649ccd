"""
체크포인트 저장소 포트 인터페이스
"""
from abc import ABC, abstractmethod
from typing import Optional

from core.domain.models import Checkpoint


class CheckpointPort(ABC):

    @abstractmethod
    def save(self, checkpoint: Checkpoint, path: str) -> str:
        """체크포인트를 저장합니다.

        Args:
            checkpoint (Checkpoint): 저장할 상태.
            path (str): 저장 경로 (저장소 상대 경로).

        Returns:
            str: 저장된 직렬화 데이터의 sha256 hex.
        """
        pass

    @abstractmethod
    def load(self, path: str, expected_hash: Optional[str] = None) -> Checkpoint:
        """체크포인트를 로드합니다.

        Args:
            path (str): 저장 경로.
            expected_hash (Optional[str]): 기대하는 config hash. 다르면 거부합니다.

        Raises:
            CheckpointError: 파일이 없거나 형식 버전이 다른 경우.
            ChecksumError: 잘렸거나 손상된 경우.
            CheckpointMismatchError: config hash 가 다른 경우.
        """
        pass
