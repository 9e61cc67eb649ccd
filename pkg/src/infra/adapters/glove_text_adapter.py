"""
텍스트 형식 단어 임베딩 어댑터

`token v1 v2 ... vE` 형식(공백 구분, UTF-8, 한 줄에 토큰 하나)의 사전 학습 임베딩 파일을 읽고 씁니다.
"""
from pathlib import Path
from typing import Sequence

import numpy as np

from core.domain.models import EmbeddingTable, class_name_tokens
from core.errors import EmbeddingParseError, MissingEmbeddingError
from core.logger import logger
from core.ports.embedding_source_port import EmbeddingSourcePort


def file_token(name: str) -> str:
    """공백이 있는 클래스 이름을 파일 토큰 하나로 합칩니다 ('remote control' → 'remotecontrol')."""
    return "".join(name.lower().split())


class GloveTextAdapter(EmbeddingSourcePort):
    """텍스트 임베딩 파일 어댑터.

    클래스 이름은 다음 순서로 해석합니다.
    1) 이름 그대로의 토큰, 2) 공백을 뺀 소문자 전체 이름 토큰 (저장 시 쓰는 형식), 3) CamelCase/공백 분리 토큰들의 평균.
    """

    def _candidates(self, name: str) -> list[list[str]]:
        return [[name], [file_token(name)], class_name_tokens(name)]

    def load(self, path: str, wanted: Sequence[str]) -> EmbeddingTable:
        file_path = Path(path)
        if not file_path.exists():
            raise EmbeddingParseError(f"임베딩 파일이 없습니다: {path}")

        needed = {token for name in wanted for group in self._candidates(name) for token in group}
        found: dict[str, np.ndarray] = {}
        dim = None

        with open(file_path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                fields = line.rstrip("\n").split()
                if not fields:
                    continue
                width = len(fields) - 1
                if dim is None:
                    if width < 1:
                        raise EmbeddingParseError(f"{path}:{line_no} 벡터 값이 없습니다")
                    dim = width
                elif width != dim:
                    raise EmbeddingParseError(f"{path}:{line_no} 차원이 {dim} 이 아니라 {width} 입니다")
                token = fields[0]
                if token in needed and token not in found:
                    try:
                        found[token] = np.array([float(v) for v in fields[1:]], dtype=np.float64)
                    except ValueError as e:
                        raise EmbeddingParseError(f"{path}:{line_no} 숫자가 아닌 값이 있습니다: {e}") from e

        if dim is None:
            raise EmbeddingParseError(f"임베딩 파일이 비어 있습니다: {path}")

        vectors: dict[str, np.ndarray] = {}
        missing: list[str] = []
        for name in wanted:
            for group in self._candidates(name):
                if group and all(token in found for token in group):
                    vectors[name] = np.mean([found[token] for token in group], axis=0)
                    break
            else:
                missing.append(name)

        if missing:
            raise MissingEmbeddingError(f"임베딩 파일에 없는 클래스: {missing}")

        logger.info(f"[Adapter:GloveText] {len(vectors)}개 클래스 임베딩 로드 (E={dim}, file={path})")
        return EmbeddingTable(dim=dim, vectors=vectors)

    def save(self, table: EmbeddingTable, path: str) -> None:
        file_path = Path(path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        tokens: dict[str, str] = {}
        lines = []
        for name, vec in table.vectors.items():
            token = name if name.split() == [name] else file_token(name)
            if token in tokens:
                raise EmbeddingParseError(f"클래스 '{tokens[token]}' 와 '{name}' 가 같은 토큰 '{token}' 으로 저장됩니다")
            tokens[token] = name
            lines.append(" ".join([token, *(repr(float(v)) for v in vec)]))
        file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        logger.info(f"[Adapter:GloveText] 임베딩 저장: {path}")
