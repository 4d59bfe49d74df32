"""Binomial expansion of isotropic boxes into perfect and quarter-noise words.

A single isotropic box is ``(1 - 4 eps) P0 + 4 eps P1/4`` with ``P0`` the perfect PR box
and ``P1/4`` the fully local box at ``eps = 1/4``. Expanding the tensor power groups the
words with ``k`` quarter-noise factors into ``S(n, k)``, of mass ``binomial(n, k)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import itertools
import logging
import math

from prbox.boxes import EPS
from prbox.boxes import ISOTROPIC_RANGE
from prbox.boxes import Box
from prbox.boxes import Cell
from prbox.boxes import make_isotropic
from prbox.boxes import make_perfect
from prbox.boxes import mix
from prbox.boxes import tensor
from prbox.boxes import unit_box
from prbox.exceptions import InvalidInputError
from prbox.localpart import SolveMode
from prbox.localpart import local_part
from prbox.lp import Certificate
from prbox.managers import JobManager
from prbox.numeric import Poly
from prbox.numeric import Scalar
from prbox.numeric import format_scalar


_logger = logging.getLogger(__name__)

MAX_WORDS_N = 3

# Instances whose local part is recorded but not asserted.
EXPLORATORY = frozenset({(3, 1), (3, 2)})


def quarter_box() -> Box:
    """The isotropic box at ``eps = 1/4``, which is local."""
    return Box(make_isotropic(1, Fraction(1, 4)).table, name="P1/4")


def _check_nk(n: int, k: int) -> None:
    if n < 1 or n > MAX_WORDS_N:
        raise InvalidInputError(f"S(n, k) is supported for 1 <= n <= {MAX_WORDS_N}, got n={n}.")
    if not 0 <= k <= n:
        raise InvalidInputError(f"Need 0 <= k <= n, got k={k} for n={n}.")


def word(positions: tuple[int, ...], n: int) -> Box:
    """Tensor word with ``P1/4`` at ``positions`` and ``P0`` elsewhere."""
    perfect = Box(make_perfect(1).table, name="P0")
    quarter = quarter_box()
    result = unit_box()
    for i in range(n):
        result = tensor(result, quarter if i in positions else perfect)
    return result


def snk_box(n: int, k: int) -> Box:
    """Sum of the ``binomial(n, k)`` words with ``k`` quarter-noise factors."""
    _check_nk(n, k)
    words = [word(positions, n) for positions in itertools.combinations(range(n), k)]
    total = mix([1] * len(words), words)
    return Box(total.table, total.mass, name=f"S({n},{k})")


@dataclass(frozen=True)
class SnkReport:
    """Local part of ``S(n, k)`` as a fraction of its mass and in absolute terms."""

    n: int
    k: int
    snk: Box
    fraction: Fraction
    certificate: Certificate

    @property
    def mass(self) -> int:
        return math.comb(self.n, self.k)

    @property
    def absolute(self) -> Fraction:
        return self.fraction * self.mass

    @property
    def exploratory(self) -> bool:
        return (self.n, self.k) in EXPLORATORY


def snk(
    n: int, k: int, *, mode: SolveMode = "colgen", manager: JobManager | None = None
) -> SnkReport:
    """Builds ``S(n, k)`` and computes its certified local part."""
    box = snk_box(n, k)
    fraction, certificate = local_part(box, mode, manager=manager)
    report = SnkReport(n, k, box, fraction, certificate)
    label = " (exploratory)" if report.exploratory else ""
    _logger.info(
        f"S({n},{k}){label}: local part {report.absolute} of mass {report.mass}, "
        f"fraction {fraction}."
    )
    return report


@dataclass(frozen=True)
class ExpansionCheck:
    ok: bool
    message: str = "expansion matches"
    cell: Cell | None = None

    def __bool__(self) -> bool:
        return self.ok


def snk_expansion(n: int, eps: Scalar | int = EPS) -> Box:
    """``sum_k (4 eps)^k (1 - 4 eps)^(n - k) S(n, k)``."""
    weights: list[Scalar] = [(4 * eps) ** k * (1 - 4 * eps) ** (n - k) for k in range(n + 1)]
    domain = ISOTROPIC_RANGE if isinstance(eps, Poly) else None
    return mix(weights, [snk_box(n, k) for k in range(n + 1)], domain=domain)


def snk_expansion_check(n: int, eps: Scalar | int = EPS) -> ExpansionCheck:
    """Compares the word expansion with the isotropic box entrywise, symbolically if ``eps``
    is the symbol :data:`~prbox.boxes.EPS`."""
    target = make_isotropic(n, eps)
    expanded = snk_expansion(n, eps)
    for cell in target.cells():
        if expanded[cell] != target[cell]:
            return ExpansionCheck(
                False,
                f"Expansion differs at {cell}: {format_scalar(expanded[cell])} "
                f"!= {format_scalar(target[cell])}.",
                cell,
            )
    return ExpansionCheck(True)
