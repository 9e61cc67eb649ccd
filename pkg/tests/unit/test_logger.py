import logging

import pytest

from core.logger import logger, set_level, setup_logger


@pytest.fixture
def restore_level():
    level = logger.level
    yield
    logger.setLevel(level)


def test_setup_logger_is_idempotent():
    """두 번 호출해도 핸들러가 늘어나지 않습니다"""
    # Given
    count = len(setup_logger().handlers)

    # When
    again = setup_logger()

    # Then
    assert again is logger
    assert len(again.handlers) == count


def test_set_level_accepts_case_insensitive_names(restore_level):
    """--log-level debug 처럼 소문자도 받습니다"""
    set_level("debug")
    assert logger.level == logging.DEBUG


def test_set_level_rejects_unknown_level(restore_level):
    """지원하지 않는 레벨은 ValueError"""
    with pytest.raises(ValueError):
        set_level("verbose")
