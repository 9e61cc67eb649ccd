from typing import Dict, Optional, List
import pandas as pd
from core.ports.storage_port import StoragePort


class FakeStorageAdapter(StoragePort):
    """테스트용 인메모리 스토리지 어댑터"""

    def __init__(self):
        self.files: Dict[str, bytes] = {}
        self.dataframes: Dict[str, pd.DataFrame] = {}
        self.directories: List[str] = []

    def save_dataframe_csv(self, df: pd.DataFrame, path: str, **kwargs) -> bool:
        self.dataframes[path] = df.copy()
        return True

    def path_exists(self, path: str) -> bool:
        return (path in self.files) or (path in self.dataframes)

    def ensure_directory(self, path: str) -> bool:
        self.directories.append(path)
        return True

    def get_file(self, path: str) -> Optional[bytes]:
        return self.files.get(path)

    def put_file(self, path: str, data: bytes) -> bool:
        self.files[path] = data
        return True

    def append_line(self, path: str, line: str) -> bool:
        self.files[path] = self.files.get(path, b"") + (line + "\n").encode("utf-8")
        return True

    def list_files(self, directory_path: str) -> list[str]:
        prefix = directory_path.rstrip("/") + "/"
        return sorted(
            path[len(prefix):] for path in self.files
            if path.startswith(prefix) and "/" not in path[len(prefix):]
        )

    def text(self, path: str) -> str:
        return self.files[path].decode("utf-8")
