from fractions import Fraction
import logging

import pytest

from prbox import config
from prbox.config import Settings
from prbox.exceptions import InvalidInputError


def test_settings_defaults() -> None:
    settings = Settings.from_env({})
    assert settings == Settings()
    assert settings.probe == Fraction(1, 8)


def test_settings_from_environment() -> None:
    settings = Settings.from_env(
        {"PRBOX_THREADS": "4", "PRBOX_BUDGET": "1000", "PRBOX_SEED": "7", "PRBOX_PROBE": "1/5"}
    )
    assert settings == Settings(threads=4, budget=1000, seed=7, probe=Fraction(1, 5))


def test_settings_read_process_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("PRBOX_SEED", "99")
    assert Settings.from_env().seed == 99


@pytest.mark.parametrize(
    "environ", [{"PRBOX_THREADS": "many"}, {"PRBOX_PROBE": "1/0"}, {"PRBOX_BUDGET": "1e3"}]
)
def test_invalid_settings(environ: dict[str, str]) -> None:
    with pytest.raises(InvalidInputError):
        Settings.from_env(environ)


def test_verbosity() -> None:
    logger = logging.getLogger("prbox")
    try:
        config.set_verbosity(logging.WARNING)
        assert logger.level == logging.WARNING
    finally:
        config.set_verbosity(logging.INFO)


def test_disable_and_enable_logging() -> None:
    logger = logging.getLogger("prbox")
    try:
        config.disable_logging()
        assert not logger.handlers
    finally:
        config.enable_logging()
    assert len(logger.handlers) == 1
