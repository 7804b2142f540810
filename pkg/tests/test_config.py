import logging

import pytest

from src.config import ConfigurationManager
from src.domain.entities import ToolkitConfiguration
from src.infrastructure.services import LOGGER_NAME, LoggingServiceImpl

NDEF_VARIABLES = (
    "NDEF_GRID", "NDEF_RANDOM_POINTS", "NDEF_SEED", "NDEF_TOLERANCE",
    "NDEF_LOG_LEVEL", "NDEF_LOG_FILE", "NDEF_SCHEMA", "NDEF_CATALOG_DIR",
)


@pytest.fixture
def clean_env(monkeypatch):
    for name in NDEF_VARIABLES:
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


def test_defaults(clean_env):
    config = ConfigurationManager().get_configuration()
    assert config == ToolkitConfiguration()
    ConfigurationManager().validate_configuration(config)


def test_environment_overrides(clean_env):
    clean_env.setenv("NDEF_GRID", "9")
    clean_env.setenv("NDEF_RANDOM_POINTS", "0")
    clean_env.setenv("NDEF_TOLERANCE", "1e-6")
    clean_env.setenv("NDEF_LOG_FILE", "")
    clean_env.setenv("NDEF_LOG_LEVEL", "debug")
    config = ConfigurationManager().get_configuration()
    assert (config.grid, config.random_points, config.tolerance) == (9, 0, 1e-6)
    assert config.log_file is None
    ConfigurationManager().validate_configuration(config)


def test_malformed_number(clean_env):
    clean_env.setenv("NDEF_SEED", "seven")
    with pytest.raises(ValueError, match="NDEF_"):
        ConfigurationManager()


@pytest.mark.parametrize(
    "overrides, variable",
    [
        ({"grid": 1}, "NDEF_GRID"),
        ({"grid": 65}, "NDEF_GRID"),
        ({"random_points": -1}, "NDEF_RANDOM_POINTS"),
        ({"tolerance": 2.0}, "NDEF_TOLERANCE"),
        ({"log_level": "LOUD"}, "NDEF_LOG_LEVEL"),
    ],
)
def test_validation(clean_env, overrides, variable):
    config = ToolkitConfiguration(**overrides)
    with pytest.raises(ValueError, match=variable):
        ConfigurationManager().validate_configuration(config)


def test_logging_service_writes_file(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    logger = logging.getLogger(LOGGER_NAME)
    previous = list(logger.handlers)
    for handler in previous:
        logger.removeHandler(handler)
    logger._ndef_configured = False
    try:
        service = LoggingServiceImpl(str(log_file), "INFO")
        service.info("scenario built")
        service.debug("hidden")
        for handler in logger.handlers:
            handler.flush()
        text = log_file.read_text()
        assert "NormalDeformations - INFO - scenario built" in text
        assert "hidden" not in text
    finally:
        for handler in list(logger.handlers):
            handler.close()
            logger.removeHandler(handler)
        for handler in previous:
            logger.addHandler(handler)
        logger._ndef_configured = bool(previous)
