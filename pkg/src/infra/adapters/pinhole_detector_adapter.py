"""
정답 기반 핀홀 검출기

씬의 객체를 에이전트 카메라(높이 1.5 m, heading/pitch)로 해석적으로 투영해 바운딩 박스를 만듭니다.
가림(occlusion)은 고려하지 않습니다.
"""
import math
from typing import Optional

import numpy as np

from core.config import CameraConfig
from core.domain.models import CAMERA_HEIGHT_M, AgentPose, Detection, Scene
from core.ports.detector_port import DetectorPort


class PinholeDetectorAdapter(DetectorPort):
    """핀홀 카메라 투영 검출기.

    카메라 좌표계:
        forward_h = dx·cosθ + dy·sinθ        (수평 전방 거리)
        lateral   = dx·sinθ − dy·cosθ        (오른쪽 양수)
        depth     = forward_h·cosφ + dz·sinφ
        up        = −forward_h·sinφ + dz·cosφ

    이미지 좌표:
        x = lateral / depth / (2·tan(hfov/2)) + 0.5
        y = 0.5 − up / depth / (2·tan(vfov/2))
        S = clamp((size / (depth · 2·tan(hfov/2)))², 0, 1)

    Attributes:
        camera (CameraConfig): FOV, 최대 거리, 노이즈 옵션.
    """

    def __init__(self, camera: Optional[CameraConfig] = None):
        self.camera = camera or CameraConfig()
        self._tan_h = math.tan(math.radians(self.camera.hfov_deg) / 2.0)
        self._tan_v = math.tan(math.radians(self.camera.vfov_deg) / 2.0)

    def _project(self, scene: Scene, pose: AgentPose) -> list[Detection]:
        cam_x, cam_y = pose.position_m(scene.cell_m)
        theta = math.radians(pose.heading)
        phi = math.radians(pose.pitch)
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        cos_p, sin_p = math.cos(phi), math.sin(phi)

        detections = []
        for obj in scene.objects:
            dx, dy, dz = obj.x_w - cam_x, obj.y_w - cam_y, obj.z_w - CAMERA_HEIGHT_M
            forward_h = dx * cos_t + dy * sin_t
            lateral = dx * sin_t - dy * cos_t
            depth = forward_h * cos_p + dz * sin_p
            up = -forward_h * sin_p + dz * cos_p
            if depth <= 0.0 or depth > self.camera.max_range_m:
                continue

            u = lateral / depth / (2.0 * self._tan_h) + 0.5
            v = 0.5 - up / depth / (2.0 * self._tan_v)
            if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
                continue

            area = min(1.0, (obj.size_m / (depth * 2.0 * self._tan_h)) ** 2)
            detections.append(Detection(obj.class_name, u, v, area, depth, obj.instance_id))

        detections.sort(key=lambda d: (d.depth, d.class_name))
        return detections

    def detect(self, scene: Scene, pose: AgentPose, rng: Optional[np.random.Generator] = None) -> list[Detection]:
        detections = self._project(scene, pose)
        if rng is None or (self.camera.drop_prob == 0.0 and self.camera.jitter_sigma == 0.0):
            return detections

        noisy = []
        for det in detections:
            if self.camera.drop_prob > 0.0 and rng.random() < self.camera.drop_prob:
                continue
            if self.camera.jitter_sigma > 0.0:
                jx, jy = rng.normal(0.0, self.camera.jitter_sigma, size=2)
                det = Detection(
                    det.class_name,
                    float(np.clip(det.x + jx, 0.0, 1.0)),
                    float(np.clip(det.y + jy, 0.0, 1.0)),
                    det.area,
                    det.depth,
                    det.instance_id,
                )
            noisy.append(det)
        return noisy
