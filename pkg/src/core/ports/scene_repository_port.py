"""
씬 저장소 포트 인터페이스

씬 파일(한 파일에 씬 하나)과 train/test 분할 매니페스트를 다룹니다.
"""
from abc import ABC, abstractmethod

from core.domain.models import Scene


class SceneRepositoryPort(ABC):

    @abstractmethod
    def save_scene(self, scene: Scene) -> str:
        """씬을 저장하고 저장 경로를 반환합니다."""
        pass

    @abstractmethod
    def load_scene(self, scene_id: str) -> Scene:
        """씬을 로드합니다.

        Raises:
            SceneFormatError: 파일이 없거나 형식/버전이 맞지 않는 경우.
        """
        pass

    @abstractmethod
    def list_scene_ids(self) -> list[str]:
        pass

    @abstractmethod
    def save_manifest(self, train_ids: list[str], test_ids: list[str]) -> str:
        """train/test 분할 매니페스트를 저장합니다."""
        pass

    @abstractmethod
    def load_manifest(self) -> dict[str, list[str]]:
        """{'train': [...], 'test': [...]} 형태의 매니페스트를 반환합니다."""
        pass
