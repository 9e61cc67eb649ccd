"""
프로젝트 공통 예외 계층

서비스는 예외를 발생시키고, CLI 명령은 이를 종료 코드로 변환합니다.
(ConfigError → 2, 그 외 → 1)
"""


class TdanetError(Exception):
    """모든 도메인 예외의 기본 클래스."""


# --- grad ---
class ShapeError(TdanetError):
    """텐서 차원이 맞지 않을 때 발생합니다."""


class NonFiniteError(TdanetError):
    """연산 결과 또는 그래디언트에 NaN/Inf 가 포함될 때 발생합니다."""


class NonDeterministicError(TdanetError):
    """동일 입력에 대한 forward 평가가 서로 다를 때 발생합니다."""


class InvalidArgumentError(TdanetError, ValueError):
    """grad 연산에 허용 범위를 벗어난 인자가 들어올 때 발생합니다."""


# --- embed ---
class EmbeddingParseError(TdanetError):
    """임베딩 텍스트 파일 형식 오류."""


class MissingEmbeddingError(TdanetError):
    """요청한 클래스의 토큰이 임베딩 파일에 없을 때 발생합니다."""


class UnknownClassError(TdanetError, KeyError):
    """등록되지 않은 객체 클래스를 조회할 때 발생합니다."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown class"


class CatalogError(TdanetError):
    """클래스 카탈로그 정의가 불변식을 위반할 때 발생합니다."""


class PrototypeCapacityError(TdanetError):
    """프로토타입 수가 임베딩 차원을 초과할 때 발생합니다."""


# --- sim ---
class SceneGenerationError(TdanetError):
    """씬 생성 설정이 만족 불가능할 때 발생합니다."""


class SceneFormatError(TdanetError):
    """씬 파일 파싱 또는 버전 오류."""


class ParentTableError(TdanetError):
    """부모 확률 테이블을 만들 수 없을 때 발생합니다."""


class EpisodeSamplingError(TdanetError):
    """학습/평가 씬에서 조건에 맞는 에피소드를 뽑을 수 없을 때 발생합니다."""


class InvalidActionError(TdanetError):
    """정책이 유효하지 않은 행동 인덱스를 반환했을 때 발생합니다."""


# --- rl ---
class CheckpointError(TdanetError):
    """체크포인트 입출력 오류."""


class ChecksumError(CheckpointError):
    """체크포인트 파일이 손상되었거나 잘린 경우."""


class CheckpointMismatchError(CheckpointError):
    """체크포인트의 포맷 버전 또는 설정 해시가 현재 설정과 다른 경우."""


# --- eval ---
class InfeasibleSplitError(TdanetError):
    """seen/unseen 분할 조건을 만족할 수 없을 때 발생합니다."""


class MetricInvariantError(TdanetError):
    """SR/SPL 집계 중 불변식(e_i >= L_i 등)이 깨졌을 때 발생합니다."""


# --- cli ---
class ConfigError(TdanetError):
    """설정 파일 또는 CLI 인자가 유효하지 않을 때 발생합니다."""
