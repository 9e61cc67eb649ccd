"""
전역 로거

콘솔과 회전 파일 핸들러를 가진 `tdanet` 로거를 만듭니다. 메시지에는 `[Service:A3CTrainer]` 같은
구성 요소 태그를 붙이고, 학습 워커가 남긴 줄은 스레드 이름(W_0, W_1 ...)으로 구분됩니다.
학습 메트릭은 로그가 아니라 logs/metrics.jsonl 에 기록합니다.

환경변수:
    LOG_LEVEL        로그 레벨 (기본 INFO)
    TDANET_LOG_DIR   파일 로그 디렉토리 (기본 output/logs)
    TDANET_LOG_FILE  "0" 이면 파일 로그를 쓰지 않습니다
"""
import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] [%(name)s] [%(threadName)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _file_handler(formatter: logging.Formatter) -> Optional[logging.Handler]:
    if os.getenv("TDANET_LOG_FILE", "1") == "0":
        return None
    log_dir = os.getenv("TDANET_LOG_DIR", os.path.join("output", "logs"))
    os.makedirs(log_dir, exist_ok=True)
    # 최대 10MB, 백업 5개
    handler = RotatingFileHandler(
        os.path.join(log_dir, "app.log"),
        maxBytes=10 * 1024 * 1024,
        backupCount=5,
        encoding="utf-8",
    )
    handler.setFormatter(formatter)
    return handler


def setup_logger(name: str = "tdanet") -> logging.Logger:
    """애플리케이션 전역 로거를 초기화하고 반환합니다. 이미 핸들러가 있으면 그대로 반환합니다."""
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    level = os.getenv("LOG_LEVEL", "INFO").upper()
    logger.setLevel(getattr(logging, level, logging.INFO))
    logger.propagate = False
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    console = logging.StreamHandler()
    console.setFormatter(formatter)
    logger.addHandler(console)

    try:
        handler = _file_handler(formatter)
        if handler is not None:
            logger.addHandler(handler)
    except OSError as e:
        # 파일 로그를 만들 수 없으면 콘솔은 경고 이상만 출력
        console.setLevel(logging.WARNING)
        logger.warning(f"파일 로그를 설정하지 못했습니다: {e}")

    return logger


def set_level(level: str) -> None:
    """CLI --log-level 로 전역 로거 레벨을 바꿉니다.

    Raises:
        ValueError: 지원하지 않는 레벨인 경우.
    """
    name = level.upper()
    if name not in LEVELS:
        raise ValueError(f"로그 레벨은 {', '.join(LEVELS)} 중 하나여야 합니다: {level}")
    logger.setLevel(getattr(logging, name))


logger = setup_logger()
