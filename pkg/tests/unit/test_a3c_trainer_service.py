import json
import threading

import numpy as np
import pytest

from core.config import ModelConfig, TrainConfig
from core.domain.catalog import default_catalog
from core.errors import EpisodeSamplingError
from core.grad import AdamOptimizer, ParamSet
from core.model.tdanet import TdaNet
from core.services.a3c_trainer_service import (
    METRICS_PATH,
    A3CTrainer,
    SharedTrainingState,
    apply_worker_update,
)
from core.services.embedding_service import synth_embeddings
from core.services.navigation_env_service import NavigationEnvironment
from infra.adapters.binary_checkpoint_adapter import BinaryCheckpointAdapter
from infra.adapters.pinhole_detector_adapter import PinholeDetectorAdapter
from tests.fakes.fake_storage_adapter import FakeStorageAdapter
from tests.fakes.scene_builders import corridor_scene, toy_parent_table, toy_room

TINY = ModelConfig(d_att=4, d_l1=8, d_sa=8, ffn=8, hidden=8, dropout=0.25)


@pytest.fixture(scope="module")
def model():
    return TdaNet(TINY, synth_embeddings(default_catalog(), dim=8, noise=0.2, seed=0))


def _env():
    return NavigationEnvironment(PinholeDetectorAdapter(), toy_parent_table())


def _train_config(**overrides):
    values = dict(episodes=6, max_steps=8, horizon=3, log_every=2, checkpoint_every=0, seed=7)
    values.update(overrides)
    return TrainConfig(**values)


def _trainer(model, storage, **overrides):
    checkpoints = BinaryCheckpointAdapter(storage)
    return A3CTrainer(model, _env, _train_config(**overrides), storage, checkpoints, config_hash="h")


def _records(storage):
    return [json.loads(line) for line in storage.text(METRICS_PATH).splitlines()]


# ---------------------------------------------------------------------------
# apply_worker_update
# ---------------------------------------------------------------------------

def _params(seed=0):
    params = ParamSet()
    rng = np.random.default_rng(seed)
    params.register("a", rng.normal(size=(3, 4)))
    params.register("b", rng.normal(size=(1, 4)))
    return params


def _grads(rng):
    return {"a": rng.normal(size=(3, 4)), "b": rng.normal(size=(1, 4))}


def test_single_worker_update_matches_synchronous_adam():
    shared_params, sync_params = _params(), _params()
    shared = SharedTrainingState(shared_params, AdamOptimizer(lr=1e-2), budget=1)
    sync = AdamOptimizer(lr=1e-2)
    rng = np.random.default_rng(1)

    for _ in range(5):
        grads = _grads(rng)
        version = apply_worker_update(shared, grads)
        sync.step(sync_params, grads)

    assert version == 5
    for name in ("a", "b"):
        np.testing.assert_array_equal(shared_params[name].numpy(), sync_params[name].numpy())


def test_non_finite_update_is_skipped_bit_exactly():
    params = _params()
    shared = SharedTrainingState(params, AdamOptimizer(), budget=1)
    before = params.to_arrays()
    grads = _grads(np.random.default_rng(0))
    grads["b"][0, 2] = np.nan

    assert apply_worker_update(shared, grads) is None
    assert shared.nan_skipped == 1
    assert params.version == 0
    for name, value in before.items():
        np.testing.assert_array_equal(params[name].numpy(), value)


@pytest.mark.parametrize("workers, per_worker, nan_every", [(4, 250, 0), (8, 100, 7)])
def test_no_update_is_lost_under_concurrency(workers, per_worker, nan_every):
    params = _params()
    shared = SharedTrainingState(params, AdamOptimizer(lr=1e-4), budget=1)

    def job(worker_id):
        rng = np.random.default_rng(worker_id)
        for k in range(per_worker):
            grads = _grads(rng)
            if nan_every and k % nan_every == 0:
                grads["a"][0, 0] = np.inf
            apply_worker_update(shared, grads)

    threads = [threading.Thread(target=job, args=(w,)) for w in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert shared.updates_attempted == workers * per_worker
    assert params.version == shared.updates_attempted - shared.nan_skipped
    assert shared.optimizer.state.step == params.version


def test_episode_claims_respect_budget_across_threads():
    shared = SharedTrainingState(_params(), AdamOptimizer(), budget=100)
    claimed = []
    lock = threading.Lock()

    def job():
        while (index := shared.claim_episode()) is not None:
            with lock:
                claimed.append(index)

    threads = [threading.Thread(target=job) for _ in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert sorted(claimed) == list(range(100))


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def test_single_worker_training_is_bit_reproducible(model):
    first, second = FakeStorageAdapter(), FakeStorageAdapter()

    a = _trainer(model, first).train([toy_room(), corridor_scene()])
    b = _trainer(model, second).train([toy_room(), corridor_scene()])

    assert first.files[METRICS_PATH] == second.files[METRICS_PATH]
    assert first.files["checkpoints/final.bin"] == second.files["checkpoints/final.bin"]
    assert a.episodes == 6
    assert [r["episode"] for r in _records(first)] == [2, 4, 6]
    assert set(_records(first)[0]) >= {"kind", "episode", "mean_reward", "mean_length", "policy_loss", "value_loss", "entropy"}


def test_budget_is_exact_with_several_workers(model):
    storage = FakeStorageAdapter()

    result = _trainer(model, storage, workers=3, episodes=10, log_every=1).train([toy_room(), corridor_scene()])

    assert result.episodes == 10
    assert len(_records(storage)) == 10
    assert result.params.version == result.updates


def test_resume_continues_counter_and_matches_uninterrupted_run(model):
    scenes = [toy_room(), corridor_scene()]
    straight = _trainer(model, FakeStorageAdapter(), episodes=6).train(scenes)

    storage = FakeStorageAdapter()
    partial = _trainer(model, storage, episodes=4).train(scenes)
    resumed = _trainer(model, storage, episodes=6).train(scenes, resume=partial.checkpoint)

    assert partial.episodes == 4
    assert resumed.episodes == 6
    assert [r["episode"] for r in _records(storage)] == [2, 4, 6]
    for name, value in straight.params.to_arrays().items():
        np.testing.assert_array_equal(resumed.params[name].numpy(), value)


def test_periodic_checkpoints_and_eval_records(model):
    storage = FakeStorageAdapter()
    calls = []

    def evaluator(params):
        calls.append(params.version)
        return {"sr": 0.0, "spl": 0.0}

    trainer = A3CTrainer(
        model, _env, _train_config(checkpoint_every=3, eval_every=2), storage,
        BinaryCheckpointAdapter(storage), config_hash="h", evaluator=evaluator,
    )
    trainer.train([toy_room()])

    assert storage.list_files("checkpoints") == ["ckpt_0000003.bin", "ckpt_0000006.bin", "final.bin"]
    assert [r["episode"] for r in _records(storage) if r["kind"] == "eval"] == [2, 4, 6]
    assert len(calls) == 3


def test_allowed_targets_must_exist_in_training_scenes(model):
    with pytest.raises(EpisodeSamplingError):
        _trainer(model, FakeStorageAdapter()).train([toy_room()], allowed_targets=["Pillow"])


def test_empty_scene_set_is_rejected(model):
    with pytest.raises(ValueError):
        _trainer(model, FakeStorageAdapter()).train([])


def test_evaluator_runs_without_holding_shared_lock(model, monkeypatch):
    # Given: 생성되는 공유 상태를 붙잡아 두는 하위 클래스
    import core.services.a3c_trainer_service as trainer_module

    created = []

    class RecordingState(SharedTrainingState):
        def __init__(self, *args, **kwargs):
            super().__init__(*args, **kwargs)
            created.append(self)

    monkeypatch.setattr(trainer_module, "SharedTrainingState", RecordingState)
    held = []

    def evaluator(params):
        held.append(created[0].lock.locked())
        return {"sr": 1.0, "spl": 0.5}

    storage = FakeStorageAdapter()
    trainer = A3CTrainer(model, _env, _train_config(eval_every=3), storage, evaluator=evaluator)

    # When: 평가 주기가 돌아오는 학습
    trainer.train([toy_room()])

    # Then: 평가 중에는 lock 이 풀려 있고 기록은 그대로 남음
    assert held == [False, False]
    evals = [r for r in _records(storage) if r["kind"] == "eval"]
    assert [r["episode"] for r in evals] == [3, 6]
    assert evals[0]["sr"] == 1.0
