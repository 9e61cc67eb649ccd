import numpy as np
import pytest

from core.config import CameraConfig
from core.domain.models import AgentPose, Scene
from infra.adapters.pinhole_detector_adapter import PinholeDetectorAdapter
from tests.fakes.scene_builders import corridor_scene, obj


@pytest.fixture
def detector():
    return PinholeDetectorAdapter(CameraConfig())


def test_on_axis_object_projects_to_image_center(detector):
    # Given: 카메라 높이에 놓인 Mug 가 정면 1 m 앞에 있음
    scene = corridor_scene(target_i=4)

    # When
    dets = detector.detect(scene, AgentPose(0, 2, heading=0, pitch=0))

    # Then
    assert len(dets) == 1
    assert dets[0].x == pytest.approx(0.5, abs=1e-9)
    assert dets[0].y == pytest.approx(0.5, abs=1e-9)
    assert dets[0].depth == pytest.approx(1.0)
    assert dets[0].instance_id == 0


def test_object_beyond_max_range_is_excluded(detector):
    scene = corridor_scene(target_i=25, width=30)
    assert detector.detect(scene, AgentPose(0, 2)) == []


def test_object_behind_agent_is_excluded(detector):
    scene = corridor_scene(target_i=4)
    assert detector.detect(scene, AgentPose(2, 2, heading=180)) == []


def test_doubling_depth_quarters_area(detector):
    near = detector.detect(corridor_scene(target_i=4), AgentPose(0, 2))[0]
    far = detector.detect(corridor_scene(target_i=8), AgentPose(0, 2))[0]

    assert far.depth == pytest.approx(2.0 * near.depth)
    assert far.area == pytest.approx(near.area / 4.0)


def test_object_left_of_axis_has_smaller_x(detector):
    scene = Scene("s", 10, 10, frozenset(), (obj(0, "Mug", 4, 6, 1.5), obj(1, "Cup", 4, 2, 1.5)))

    dets = {d.class_name: d for d in detector.detect(scene, AgentPose(0, 4, heading=0))}

    # heading 0 (+x) 에서 +y 쪽이 왼쪽
    assert dets["Mug"].x < 0.5 < dets["Cup"].x


def test_low_object_needs_look_down():
    detector = PinholeDetectorAdapter()
    scene = Scene("s", 6, 5, frozenset(), (obj(0, "Mug", 2, 2, 0.95),))

    assert detector.detect(scene, AgentPose(0, 2, pitch=0)) == []
    assert len(detector.detect(scene, AgentPose(0, 2, pitch=-30))) == 1


def test_output_sorted_by_depth_then_class(detector):
    scene = Scene(
        "s", 10, 10, frozenset(),
        (obj(0, "Pan", 6, 4, 1.5), obj(1, "Cup", 3, 4, 1.5), obj(2, "Bowl", 3, 4, 1.5)),
    )

    dets = detector.detect(scene, AgentPose(0, 4))

    assert [d.class_name for d in dets] == ["Bowl", "Cup", "Pan"]


def test_detection_is_deterministic(detector):
    scene = corridor_scene(target_i=6)
    pose = AgentPose(1, 2, heading=0, pitch=0)
    assert detector.detect(scene, pose) == detector.detect(scene, pose)


def test_noise_requires_rng_and_is_seeded():
    detector = PinholeDetectorAdapter(CameraConfig(drop_prob=0.5, jitter_sigma=0.05))
    scene = Scene("s", 12, 10, frozenset(), tuple(obj(k, "Mug", 4 + k % 3, 2 + k, 1.5) for k in range(6)))
    pose = AgentPose(0, 4)

    clean = detector.detect(scene, pose)
    a = detector.detect(scene, pose, np.random.default_rng(3))
    b = detector.detect(scene, pose, np.random.default_rng(3))

    assert a == b
    assert len(a) <= len(clean)
    assert all(0.0 <= d.x <= 1.0 and 0.0 <= d.y <= 1.0 for d in a)
