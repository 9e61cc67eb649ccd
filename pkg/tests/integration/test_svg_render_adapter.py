import xml.etree.ElementTree as ET

from core.config import CameraConfig
from core.domain.models import Action, AgentPose, EpisodeResult, StepRecord
from infra.adapters.svg_render_adapter import SvgRenderAdapter
from tests.fakes.scene_builders import toy_room


def _result(steps):
    records = tuple(
        StepRecord(k, AgentPose(1 + k, 2, 0), Action.MOVE_AHEAD, -0.01, ()) for k in range(steps)
    )
    return EpisodeResult("toy", "kitchen", "Mug", False, steps, 3, steps=records, start=AgentPose(1, 2, 0))


def test_render_is_valid_svg():
    data = SvgRenderAdapter().render_trajectory(toy_room(), _result(3), CameraConfig())

    root = ET.fromstring(data)

    assert root.tag.endswith("svg")
    assert b"toy / Mug" in data


def test_render_is_byte_identical_for_same_input():
    adapter = SvgRenderAdapter()
    first = adapter.render_trajectory(toy_room(), _result(3), CameraConfig())
    second = adapter.render_trajectory(toy_room(), _result(3), CameraConfig())
    assert first == second


def test_render_without_steps_uses_start_pose():
    data = SvgRenderAdapter().render_trajectory(toy_room(), _result(0), CameraConfig(hfov_deg=60))
    assert ET.fromstring(data).tag.endswith("svg")
