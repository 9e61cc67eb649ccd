import numpy as np
import pytest

from core.domain.catalog import default_catalog
from core.domain.models import EmbeddingTable
from core.errors import EmbeddingParseError, MissingEmbeddingError
from core.services.embedding_service import synth_embeddings
from infra.adapters.glove_text_adapter import GloveTextAdapter


@pytest.fixture
def adapter():
    return GloveTextAdapter()


def _write(tmp_path, text: str) -> str:
    path = tmp_path / "vectors.txt"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_direct_parse(adapter, tmp_path):
    path = _write(tmp_path, "cup 0.1 0.2 0.3\nmug 1 2 3\n")

    table = adapter.load(path, ["cup"])

    assert table.dim == 3
    assert table.classes == ["cup"]
    np.testing.assert_array_equal(table.vectors["cup"], [0.1, 0.2, 0.3])


def test_multi_word_class_averages_tokens(adapter, tmp_path):
    path = _write(tmp_path, "remote 1.0 0.0\ncontrol 0.0 1.0\n")

    table = adapter.load(path, ["remote control", "RemoteControl"])

    np.testing.assert_allclose(table.vectors["remote control"], [0.5, 0.5])
    np.testing.assert_allclose(table.vectors["RemoteControl"], [0.5, 0.5])


def test_whole_name_token_wins_over_average(adapter, tmp_path):
    path = _write(tmp_path, "teddy 1 0\nbear 0 1\nteddybear 3 3\n")

    table = adapter.load(path, ["TeddyBear"])

    np.testing.assert_array_equal(table.vectors["TeddyBear"], [3.0, 3.0])


def test_missing_class_is_named(adapter, tmp_path):
    path = _write(tmp_path, "cup 0.1 0.2\n")

    with pytest.raises(MissingEmbeddingError) as exc:
        adapter.load(path, ["cup", "Spaceship"])
    assert "Spaceship" in str(exc.value)


def test_inconsistent_dimension_reports_line_number(adapter, tmp_path):
    path = _write(tmp_path, "cup 0.1 0.2\nmug 0.1 0.2 0.3\n")

    with pytest.raises(EmbeddingParseError) as exc:
        adapter.load(path, ["cup"])
    assert ":2" in str(exc.value)


def test_save_then_load_gives_identical_vectors(adapter, tmp_path):
    # Given
    catalog = default_catalog()
    table = synth_embeddings(catalog, dim=8, noise=0.2, seed=7)
    path = str(tmp_path / "out" / "table.txt")

    # When
    adapter.save(table, path)
    reloaded = adapter.load(path, table.classes)

    # Then
    for name in table.classes:
        assert reloaded.vectors[name].tobytes() == table.vectors[name].tobytes()


@pytest.mark.parametrize("name", ["remote control", "Remote  Control"])
def test_save_then_load_keeps_spaced_class_names(adapter, tmp_path, name):
    """공백이 있는 클래스 이름도 저장 → 로드 후 같은 벡터를 돌려줍니다"""
    # Given
    table = EmbeddingTable(dim=2, vectors={name: np.array([0.1, 0.2]), "Mug": np.array([1.0, 2.0])})
    path = str(tmp_path / "e.txt")

    # When
    adapter.save(table, path)
    reloaded = adapter.load(path, [name, "Mug"])

    # Then
    lines = (tmp_path / "e.txt").read_text(encoding="utf-8").splitlines()
    assert lines[0].split()[0] == "remotecontrol"
    assert all(len(line.split()) == 3 for line in lines)
    np.testing.assert_array_equal(reloaded.vectors[name], [0.1, 0.2])
    np.testing.assert_array_equal(reloaded.vectors["Mug"], [1.0, 2.0])


def test_save_rejects_names_that_collapse_to_one_token(adapter, tmp_path):
    """공백을 빼면 같은 토큰이 되는 두 이름은 저장하지 않습니다"""
    # Given
    table = EmbeddingTable(dim=1, vectors={"remote control": np.array([0.1]), "remotecontrol": np.array([0.2])})

    # When & Then
    with pytest.raises(EmbeddingParseError):
        adapter.save(table, str(tmp_path / "e.txt"))
    assert not (tmp_path / "e.txt").exists()
