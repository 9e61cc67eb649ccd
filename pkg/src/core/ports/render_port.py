"""
궤적 렌더링 포트 인터페이스
"""
from abc import ABC, abstractmethod

from core.config import CameraConfig
from core.domain.models import EpisodeResult, Scene


class RenderPort(ABC):

    @abstractmethod
    def render_trajectory(self, scene: Scene, result: EpisodeResult, camera: CameraConfig) -> bytes:
        """위에서 내려다본 씬과 에이전트 궤적을 벡터 그래픽 문서로 렌더링합니다.

        Args:
            scene (Scene): 씬.
            result (EpisodeResult): 스텝 기록이 포함된 에피소드 결과.
            camera (CameraConfig): 시야각(FOV 쐐기 표시용).

        Returns:
            bytes: SVG 문서.
        """
        pass
