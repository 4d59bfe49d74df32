from __future__ import annotations


class PRBoxError(Exception):
    """Base class for all errors raised by prbox."""


class InvalidInputError(PRBoxError, ValueError):
    """Raised on malformed input such as mismatched alphabets or duplicate abscissae."""


class ParameterRangeError(InvalidInputError):
    """Raised when a noise parameter leaves its default range without ``force=True``."""


class BudgetExceededError(PRBoxError):
    """Raised when an exhaustive enumeration would exceed the configured budget."""


class LPError(PRBoxError):
    """Base class for linear programming failures."""


class LPInfeasibleError(LPError):
    ...


class LPUnboundedError(LPError):
    ...


class ComponentError(PRBoxError):
    """Raised when a weighted component does not fit under a box.

    Args:
        cell:
            The first ``(x, y, u, v)`` cell where the weighted component exceeds the box.
        message:
            Human readable description of the violation.
    """

    def __init__(self, cell: tuple[int, ...], message: str) -> None:
        super().__init__(message)
        self.cell = cell
