import pytest

from core.config import ModelConfig
from core.domain.catalog import default_catalog
from core.domain.models import Action, AgentPose, EpisodeSpec
from core.model.tdanet import TdaNet
from core.services.attention_dump_service import AttentionDumpService, dump_document
from core.services.embedding_service import synth_embeddings
from core.services.navigation_env_service import NavigationEnvironment
from infra.adapters.pinhole_detector_adapter import PinholeDetectorAdapter
from tests.fakes.scene_builders import corridor_scene, toy_parent_table, toy_room

ACTION_LABELS = {a.label for a in Action}


class RecordingRenderer:
    def __init__(self):
        self.calls = []

    def render_trajectory(self, scene, result, camera):
        self.calls.append((scene.scene_id, result.actions_taken))
        return b"<svg/>"


@pytest.fixture(scope="module")
def table():
    return synth_embeddings(default_catalog(), 8, 0.2, 0)


def _model(table, variant="full"):
    return TdaNet(ModelConfig(d_att=4, d_l1=8, d_sa=8, ffn=8, hidden=8, variant=variant), table)


def _service(renderer=None):
    return AttentionDumpService(NavigationEnvironment(PinholeDetectorAdapter(), toy_parent_table()), renderer)


def test_dump_records_every_step_with_normalized_attention(table):
    # Given
    model = _model(table)
    renderer = RecordingRenderer()
    spec = EpisodeSpec(corridor_scene(), AgentPose(2, 2, 0), "Mug")

    # When
    dump = _service(renderer).dump(model, model.init_params(seed=3), spec, max_steps=12)

    # Then
    doc = dump.document
    assert doc["scene"] == "corridor"
    assert dump.result.optimal_length is not None
    assert doc["optimal_length"] == dump.result.optimal_length
    assert len(doc["steps"]) == dump.result.actions_taken
    assert renderer.calls == [("corridor", dump.result.actions_taken)]
    assert dump.render == b"<svg/>"
    for step in doc["steps"]:
        assert step["action"] in ACTION_LABELS
        if step["detections"]:
            assert step["att_sum"] == pytest.approx(1.0, abs=1e-9)
            assert sum(d["att"] for d in step["detections"]) == pytest.approx(1.0, abs=1e-5)
    assert dump.num_params > 0
    assert dump.mean_latency_ms >= 0.0
    assert "latency" not in str(doc)


def test_dump_is_deterministic(table):
    model = _model(table)
    params = model.init_params(seed=1)
    spec = EpisodeSpec(toy_room(), AgentPose(1, 2, 0), "Mug")

    first = _service().dump(model, params, spec, 10).document
    second = _service().dump(model, params, spec, 10).document

    assert first == second


def test_variant_without_target_attention_has_no_scores(table):
    model = _model(table, "no_ta")
    spec = EpisodeSpec(corridor_scene(), AgentPose(5, 2, 0), "Mug")

    doc = _service().dump(model, model.init_params(0), spec, 3).document

    first = doc["steps"][0]
    assert first["detections"] and "corr" not in first["detections"][0]
    assert first["att_sum"] is None
    assert doc["statistics"]["target_detected_steps"] == 0


def test_target_max_corr_statistic_counts_steps_where_target_wins(table):
    # Given: Mug 만 보이는 자세에서 시작 → 목표가 검출된 스텝에서 항상 최대 corr
    model = _model(table)
    spec = EpisodeSpec(corridor_scene(), AgentPose(5, 2, 0), "Mug", 0)

    dump = _service().dump(model, model.init_params(0), spec, 1)

    stats = dump.document["statistics"]
    assert stats["target_detected_steps"] == 1
    assert stats["target_max_corr_fraction"] == 1.0
    assert dump_document(dump.result, "full")["statistics"] == stats
