"""
YAML 씬 저장소 어댑터

한 파일에 씬 하나를 버전이 있는 YAML 문서로 저장합니다.
필드 순서는 고정이며 실수는 유효숫자 9자리로 기록해 저장 → 로드 → 저장이 바이트 단위로 같습니다.
"""
from typing import Any

import yaml

from core.domain.models import ObjectInstance, Scene
from core.errors import SceneFormatError
from core.logger import logger
from core.ports.scene_repository_port import SceneRepositoryPort
from core.ports.storage_port import StoragePort

SCENE_FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.yaml"


def _f9(value: float) -> float:
    return float(f"{value:.9g}")


def scene_to_document(scene: Scene) -> dict[str, Any]:
    return {
        "version": SCENE_FORMAT_VERSION,
        "id": scene.scene_id,
        "room_type": scene.room_type,
        "split": scene.split,
        "grid": {"w": scene.width, "h": scene.height, "cell_m": _f9(scene.cell_m)},
        "blocked": [[i, j] for i, j in sorted(scene.blocked)],
        "objects": [
            {
                "id": o.instance_id,
                "class": o.class_name,
                "x_w": _f9(o.x_w),
                "y_w": _f9(o.y_w),
                "z_w": _f9(o.z_w),
                "s": _f9(o.size_m),
                "is_parent": o.is_parent,
            }
            for o in scene.objects
        ],
    }


def scene_from_document(doc: Any) -> Scene:
    if not isinstance(doc, dict):
        raise SceneFormatError("씬 문서의 최상위가 매핑이 아닙니다")
    if doc.get("version") != SCENE_FORMAT_VERSION:
        raise SceneFormatError(f"지원하지 않는 씬 형식 버전: {doc.get('version')}")
    try:
        grid = doc["grid"]
        objects = tuple(
            ObjectInstance(
                instance_id=int(o["id"]),
                class_name=str(o["class"]),
                x_w=float(o["x_w"]),
                y_w=float(o["y_w"]),
                z_w=float(o["z_w"]),
                size_m=float(o["s"]),
                is_parent=bool(o["is_parent"]),
            )
            for o in doc["objects"]
        )
        scene = Scene(
            scene_id=str(doc["id"]),
            width=int(grid["w"]),
            height=int(grid["h"]),
            blocked=frozenset((int(i), int(j)) for i, j in doc["blocked"]),
            objects=objects,
            split=str(doc["split"]),
            room_type=str(doc["room_type"]),
            cell_m=float(grid["cell_m"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SceneFormatError(f"씬 문서 필드 오류: {e}") from e

    if not scene.free_cells():
        raise SceneFormatError(f"[{scene.scene_id}] 빈 셀이 없습니다")
    for o in scene.objects:
        if not (0.0 <= o.x_w <= scene.width * scene.cell_m and 0.0 <= o.y_w <= scene.height * scene.cell_m):
            raise SceneFormatError(f"[{scene.scene_id}] 객체 {o.instance_id} 가 격자 밖에 있습니다")
    return scene


def dump_scene(scene: Scene) -> str:
    return yaml.safe_dump(scene_to_document(scene), sort_keys=False, default_flow_style=None)


class YamlSceneRepositoryAdapter(SceneRepositoryPort):
    """StoragePort 위의 YAML 씬 저장소.

    Attributes:
        storage (StoragePort): 파일 저장소.
        directory (str): 씬 디렉토리 (저장소 상대 경로).
    """

    def __init__(self, storage: StoragePort, directory: str = "scenes"):
        self.storage = storage
        self.directory = directory.rstrip("/")

    def _path(self, name: str) -> str:
        return f"{self.directory}/{name}"

    def save_scene(self, scene: Scene) -> str:
        path = self._path(f"{scene.scene_id}.yaml")
        if not self.storage.put_file(path, dump_scene(scene).encode("utf-8")):
            raise SceneFormatError(f"씬 저장 실패: {path}")
        return path

    def load_scene(self, scene_id: str) -> Scene:
        path = self._path(f"{scene_id}.yaml")
        data = self.storage.get_file(path)
        if data is None:
            raise SceneFormatError(f"씬 파일이 없습니다: {path}")
        try:
            doc = yaml.safe_load(data.decode("utf-8"))
        except yaml.YAMLError as e:
            raise SceneFormatError(f"씬 파일 파싱 실패 ({path}): {e}") from e
        return scene_from_document(doc)

    def list_scene_ids(self) -> list[str]:
        return [
            name[: -len(".yaml")]
            for name in self.storage.list_files(self.directory)
            if name.endswith(".yaml") and name != MANIFEST_FILE
        ]

    def save_manifest(self, train_ids: list[str], test_ids: list[str]) -> str:
        overlap = set(train_ids) & set(test_ids)
        if overlap:
            raise SceneFormatError(f"train/test 씬이 겹칩니다: {sorted(overlap)}")
        doc = {"version": SCENE_FORMAT_VERSION, "train": list(train_ids), "test": list(test_ids)}
        path = self._path(MANIFEST_FILE)
        self.storage.put_file(path, yaml.safe_dump(doc, sort_keys=False).encode("utf-8"))
        logger.info(f"[Adapter:SceneRepository] 매니페스트 저장 (train={len(train_ids)}, test={len(test_ids)})")
        return path

    def load_manifest(self) -> dict[str, list[str]]:
        data = self.storage.get_file(self._path(MANIFEST_FILE))
        if data is None:
            raise SceneFormatError(f"매니페스트가 없습니다: {self._path(MANIFEST_FILE)}")
        doc = yaml.safe_load(data.decode("utf-8")) or {}
        return {"train": list(doc.get("train", [])), "test": list(doc.get("test", []))}
