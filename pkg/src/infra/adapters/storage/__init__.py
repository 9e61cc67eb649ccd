# 산출물 저장소 어댑터
from .local_storage_adapter import LocalStorageAdapter

__all__ = ['LocalStorageAdapter']
