"""
바이너리 체크포인트 어댑터

파일 구조 (리틀 엔디언):
    magic      4 bytes   b"TDAN"
    version    uint16
    header_len uint32
    header     JSON (utf-8): config_hash, episode, params_version, adam_step, metadata, tensors
    payload    float32 텐서 데이터 (header.tensors 순서: params → adam.m → adam.v)
    checksum   sha256(앞의 모든 바이트), 32 bytes
"""
import hashlib
import json
import struct
from typing import Optional

import numpy as np

from core.domain.models import Checkpoint
from core.errors import CheckpointError, CheckpointMismatchError, ChecksumError
from core.logger import logger
from core.ports.checkpoint_port import CheckpointPort
from core.ports.storage_port import StoragePort

MAGIC = b"TDAN"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sHI")
_DIGEST_SIZE = 32
_GROUPS = ("params", "adam_m", "adam_v")


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    tensors = []
    chunks = []
    for group in _GROUPS:
        for name, value in getattr(checkpoint, group).items():
            data = np.ascontiguousarray(value, dtype="<f4")
            tensors.append({"group": group, "name": name, "shape": list(data.shape)})
            chunks.append(data.tobytes())

    header = json.dumps(
        {
            "config_hash": checkpoint.config_hash,
            "episode": checkpoint.episode,
            "params_version": checkpoint.params_version,
            "adam_step": checkpoint.adam_step,
            "metadata": checkpoint.metadata,
            "tensors": tensors,
        },
        ensure_ascii=False,
    ).encode("utf-8")

    body = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)) + header + b"".join(chunks)
    return body + hashlib.sha256(body).digest()


def decode_checkpoint(data: bytes) -> Checkpoint:
    """바이트열을 체크포인트로 복원합니다.

    Raises:
        ChecksumError: 잘렸거나 체크섬이 맞지 않는 경우.
        CheckpointError: magic 이 다른 경우.
        CheckpointMismatchError: 형식 버전이 다른 경우.
    """
    if len(data) < _PREFIX.size + _DIGEST_SIZE:
        raise ChecksumError(f"체크포인트가 너무 짧습니다 ({len(data)} bytes)")
    body, digest = data[:-_DIGEST_SIZE], data[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumError("체크포인트 체크섬이 일치하지 않습니다 (파일이 잘렸거나 손상됨)")

    magic, version, header_len = _PREFIX.unpack_from(body)
    if magic != MAGIC:
        raise CheckpointError(f"체크포인트 파일이 아닙니다 (magic={magic!r})")
    if version != FORMAT_VERSION:
        raise CheckpointMismatchError(f"체크포인트 형식 버전 불일치: 파일={version}, 지원={FORMAT_VERSION}")

    offset = _PREFIX.size
    try:
        header = json.loads(body[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"체크포인트 헤더 파싱 실패: {e}") from e
    offset += header_len

    groups: dict[str, dict[str, np.ndarray]] = {group: {} for group in _GROUPS}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 4 * count
        if end > len(body):
            raise CheckpointError(f"텐서 '{entry['name']}' 데이터가 부족합니다")
        values = np.frombuffer(body[offset:end], dtype="<f4").reshape(shape)
        groups[entry["group"]][entry["name"]] = values.astype(np.float64)
        offset = end
    if offset != len(body):
        raise CheckpointError(f"체크포인트에 해석되지 않은 {len(body) - offset} bytes 가 남았습니다")

    return Checkpoint(
        config_hash=header["config_hash"],
        episode=int(header["episode"]),
        params_version=int(header["params_version"]),
        params=groups["params"],
        adam_step=int(header["adam_step"]),
        adam_m=groups["adam_m"],
        adam_v=groups["adam_v"],
        metadata=header["metadata"],
    )


class BinaryCheckpointAdapter(CheckpointPort):
    """StoragePort 위의 바이너리 체크포인트 저장소."""

    def __init__(self, storage: StoragePort):
        self.storage = storage

    def save(self, checkpoint: Checkpoint, path: str) -> str:
        data = encode_checkpoint(checkpoint)
        if not self.storage.put_file(path, data):
            raise CheckpointError(f"체크포인트 저장 실패: {path}")
        sha = hashlib.sha256(data).hexdigest()
        logger.info(f"[Adapter:Checkpoint] 저장 완료: {path} (episode={checkpoint.episode}, sha256={sha[:12]})")
        return sha

    def load(self, path: str, expected_hash: Optional[str] = None) -> Checkpoint:
        data = self.storage.get_file(path)
        if data is None:
            raise CheckpointError(f"체크포인트 파일이 없습니다: {path}")
        checkpoint = decode_checkpoint(data)
        if expected_hash is not None and checkpoint.config_hash != expected_hash:
            raise CheckpointMismatchError(
                f"체크포인트 설정 해시 불일치: 체크포인트={checkpoint.config_hash}, 현재 설정={expected_hash}"
            )
        logger.info(f"[Adapter:Checkpoint] 로드 완료: {path} (episode={checkpoint.episode})")
        return checkpoint


def file_sha256(storage: StoragePort, path: str) -> Optional[str]:
    data = storage.get_file(path)
    return None if data is None else hashlib.sha256(data).hexdigest()
