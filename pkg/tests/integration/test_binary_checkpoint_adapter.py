import hashlib
import struct

import numpy as np
import pytest

from core.config import ModelConfig
from core.domain.catalog import default_catalog
from core.domain.models import Checkpoint, Detection
from core.errors import CheckpointError, CheckpointMismatchError, ChecksumError
from core.grad import AdamOptimizer
from core.model.tdanet import TdaNet
from core.services.embedding_service import synth_embeddings
from infra.adapters.binary_checkpoint_adapter import BinaryCheckpointAdapter, decode_checkpoint, encode_checkpoint
from infra.adapters.storage.local_storage_adapter import LocalStorageAdapter


@pytest.fixture(scope="module")
def model():
    return TdaNet(ModelConfig(d_att=4, d_l1=8, d_sa=8, ffn=8, hidden=8), synth_embeddings(default_catalog(), 8, 0.2, 0))


@pytest.fixture
def adapter(tmp_path):
    return BinaryCheckpointAdapter(LocalStorageAdapter(str(tmp_path)))


def _checkpoint(model):
    params = model.init_params(seed=2)
    optimizer = AdamOptimizer(lr=1e-3)
    rng = np.random.default_rng(0)
    optimizer.step(params, {name: rng.normal(size=t.shape) for name, t in params.items()})
    state = optimizer.state
    return params, Checkpoint(
        config_hash="abc123",
        episode=42,
        params_version=params.version,
        params=params.to_arrays(),
        adam_step=state.step,
        adam_m=dict(state.m),
        adam_v=dict(state.v),
        metadata={"rng_states": {"0": np.random.default_rng(5).bit_generator.state}},
    )


def test_forward_survives_round_trip(tmp_path, adapter, model):
    # Given
    params, ckpt = _checkpoint(model)
    detections = [Detection("Mug", 0.4, 0.6, 0.1), Detection("Table", 0.7, 0.5, 0.3)]
    before, _, _ = model.forward(params, detections, "Mug", model.initial_hidden())

    # When
    adapter.save(ckpt, "checkpoints/a.bin")
    loaded = adapter.load("checkpoints/a.bin", expected_hash="abc123")
    restored = model.init_params(seed=99)
    restored.load_arrays(loaded.params)
    after, _, _ = model.forward(restored, detections, "Mug", model.initial_hidden())

    # Then
    np.testing.assert_allclose(after.logits.numpy(), before.logits.numpy(), rtol=1e-6, atol=1e-7)
    np.testing.assert_allclose(after.value.numpy(), before.value.numpy(), rtol=1e-6, atol=1e-7)
    assert loaded.episode == 42
    assert loaded.adam_step == 1
    assert list(loaded.params) == list(ckpt.params)
    assert loaded.metadata == ckpt.metadata


def test_serialized_form_round_trips_byte_exactly(model):
    _, ckpt = _checkpoint(model)
    data = encode_checkpoint(ckpt)
    assert encode_checkpoint(decode_checkpoint(data)) == data


def test_truncated_file_fails_checksum(tmp_path, adapter, model):
    adapter.save(_checkpoint(model)[1], "a.bin")
    path = tmp_path / "a.bin"
    path.write_bytes(path.read_bytes()[:-100])

    with pytest.raises(ChecksumError):
        adapter.load("a.bin")


def test_flipped_byte_fails_checksum(tmp_path, adapter, model):
    adapter.save(_checkpoint(model)[1], "a.bin")
    path = tmp_path / "a.bin"
    data = bytearray(path.read_bytes())
    data[len(data) // 2] ^= 0xFF
    path.write_bytes(bytes(data))

    with pytest.raises(ChecksumError):
        adapter.load("a.bin")


def test_config_hash_mismatch_names_both_hashes(adapter, model):
    adapter.save(_checkpoint(model)[1], "a.bin")

    with pytest.raises(CheckpointMismatchError) as excinfo:
        adapter.load("a.bin", expected_hash="def456")

    assert "abc123" in str(excinfo.value) and "def456" in str(excinfo.value)


def test_unknown_format_version_is_refused(model):
    data = encode_checkpoint(_checkpoint(model)[1])
    body = bytearray(data[:-32])
    struct.pack_into("<H", body, 4, 2)
    forged = bytes(body) + hashlib.sha256(bytes(body)).digest()

    with pytest.raises(CheckpointMismatchError):
        decode_checkpoint(forged)


def test_missing_file(adapter):
    with pytest.raises(CheckpointError):
        adapter.load("nope.bin")
