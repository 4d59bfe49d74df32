from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
import logging
import os

from rich.logging import RichHandler

from prbox.exceptions import InvalidInputError


_default_handler: logging.Handler | None = None


def _get_library_logger() -> logging.Logger:
    library_name = __name__.split(".")[0]
    return logging.getLogger(library_name)


def _setup_logger() -> None:
    global _default_handler
    _default_handler = RichHandler(show_path=False)
    fmt = logging.Formatter(fmt="%(message)s", datefmt="[%X]")
    _default_handler.setFormatter(fmt)
    library_root_logger = _get_library_logger()
    library_root_logger.addHandler(_default_handler)
    library_root_logger.setLevel(logging.INFO)
    library_root_logger.propagate = False


_setup_logger()


def disable_logging() -> None:
    """Disables library level logger."""
    assert _default_handler is not None
    _get_library_logger().removeHandler(_default_handler)


def enable_logging() -> None:
    """Enables library level logger."""
    assert _default_handler is not None
    _get_library_logger().addHandler(_default_handler)


def set_verbosity(level: int) -> None:
    """Sets level of library level logger."""
    _get_library_logger().setLevel(level)


@dataclass(frozen=True)
class Settings:
    """Run-wide defaults, overridable from the environment.

    Args:
        threads:
            Default number of worker processes for pricing and sweeps
            (``PRBOX_THREADS``).
        budget:
            Largest number of strategy pairs an exhaustive enumeration may visit
            (``PRBOX_BUDGET``).
        seed:
            Seed for sampled lemma checks and adversarial searches (``PRBOX_SEED``).
        probe:
            Parameter value at which symbolic entries are compared (``PRBOX_PROBE``).
    """

    threads: int = 1
    budget: int = 10**8
    seed: int = 20100
    probe: Fraction = Fraction(1, 8)

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> Settings:
        env = os.environ if environ is None else environ
        defaults = cls()
        try:
            return cls(
                threads=int(env.get("PRBOX_THREADS", defaults.threads)),
                budget=int(env.get("PRBOX_BUDGET", defaults.budget)),
                seed=int(env.get("PRBOX_SEED", defaults.seed)),
                probe=Fraction(env.get("PRBOX_PROBE", str(defaults.probe))),
            )
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidInputError(f"Invalid prbox environment setting: {e}") from e
