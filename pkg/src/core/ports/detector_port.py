"""
객체 검출기 포트 인터페이스

현재 관측(씬 + 에이전트 자세)에서 바운딩 박스 검출 목록을 만듭니다.
정답 기반 투영 검출기와 학습된 검출기를 같은 인터페이스로 교체할 수 있습니다.
"""
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from core.domain.models import AgentPose, Detection, Scene


class DetectorPort(ABC):

    @abstractmethod
    def detect(self, scene: Scene, pose: AgentPose, rng: Optional[np.random.Generator] = None) -> list[Detection]:
        """현재 시야의 검출 결과를 반환합니다.

        Args:
            scene (Scene): 씬.
            pose (AgentPose): 에이전트 자세.
            rng (Optional[np.random.Generator]): 검출 노이즈용 난수 생성기. None 이면 노이즈 없는 결과.

        Returns:
            list[Detection]: (depth, class) 오름차순으로 정렬된 검출 목록.
        """
        pass
