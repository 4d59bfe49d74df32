"""Explicit local decompositions and their exact audit.

A decomposition writes a box as ``sum_i w_i * D(s_i) + r * R`` with deterministic
strategy boxes ``D(s_i)`` and a non-signalling remainder ``R``. It is valid when the mix
reproduces the target exactly and, removing the strategies one at a time, the target
never becomes negative anywhere.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
import logging
from typing import Literal

import numpy as np

from prbox.boxes import BIASED_RANGE
from prbox.boxes import DELTA
from prbox.boxes import EPS
from prbox.boxes import ISOTROPIC_RANGE
from prbox.boxes import Box
from prbox.boxes import Cell
from prbox.boxes import make_deterministic
from prbox.boxes import make_isotropic
from prbox.boxes import make_perfect
from prbox.boxes import mix
from prbox.boxes import signalling_violation
from prbox.boxes import subtract_component
from prbox.boxes import tensor
from prbox.exceptions import InvalidInputError
from prbox.lp import Certificate
from prbox.numeric import Interval
from prbox.numeric import Scalar
from prbox.numeric import format_scalar
from prbox.numeric import is_nonnegative
from prbox.strategies import LocalDetStrategy
from prbox.strategies import depolarization_images
from prbox.strategies import orbit


_logger = logging.getLogger(__name__)

KnownDecomposition = Literal["eq3", "eq5", "lemma3", "appendix_PL"]

# Base strategies of the two-box decomposition; their images under the group make up the
# 128 strategies of weight 4*eps.
LEMMA3_BASES = (
    LocalDetStrategy.parse("[0 0 0 1; 0 0 2 0]"),
    LocalDetStrategy.parse("[0 0 0 1; 0 0 0 2]"),
)
APPENDIX_POINT = LEMMA3_BASES[0]
EQ5_STRATEGIES = (
    LocalDetStrategy.parse("[0 1; 1 0]"),
    LocalDetStrategy.parse("[0 0; 0 1]"),
    LocalDetStrategy.parse("[1 0; 1 1]"),
)


@dataclass(frozen=True)
class Decomposition:
    """Weighted deterministic strategies plus a weighted remainder box.

    Args:
        terms:
            ``(weight, strategy)`` pairs; a strategy may repeat.
        remainder_weight:
            Weight of ``remainder`` in the mix.
        remainder:
            The non-local rest.
        domain:
            Admissible parameter interval when weights are polynomials.
        name:
            Label used in reports.
    """

    terms: tuple[tuple[Scalar, LocalDetStrategy], ...]
    remainder_weight: Scalar
    remainder: Box
    domain: Interval | None = None
    name: str = ""

    @property
    def local_weight(self) -> Scalar:
        total: Scalar = Fraction(0)
        for weight, _ in self.terms:
            total = total + weight
        return total

    def distinct_terms(self) -> dict[LocalDetStrategy, Scalar]:
        """Total weight per distinct strategy."""
        merged: dict[LocalDetStrategy, Scalar] = {}
        for weight, strategy in self.terms:
            merged[strategy] = merged.get(strategy, Fraction(0)) + weight
        return merged

    def compose(self) -> Box:
        """The box this decomposition describes."""
        merged = self.distinct_terms()
        return mix(
            [*merged.values(), self.remainder_weight],
            [*(make_deterministic(s) for s in merged), self.remainder],
            domain=self.domain,
        )


@dataclass(frozen=True)
class DecompositionCheck:
    """Outcome of :func:`verify_decomposition`; truthy when the decomposition is valid."""

    ok: bool
    message: str = "decomposition verified"
    cell: Cell | None = None
    term: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def _check_parts(decomposition: Decomposition, domain: Interval | None) -> DecompositionCheck:
    for index, (weight, strategy) in enumerate(decomposition.terms):
        if not is_nonnegative(weight, domain):
            return DecompositionCheck(
                False, f"Weight {format_scalar(weight)} of {strategy} is negative.", term=index
            )
    if not is_nonnegative(decomposition.remainder_weight, domain):
        return DecompositionCheck(False, "Remainder weight is negative.")
    for cell in decomposition.remainder.cells():
        if not is_nonnegative(decomposition.remainder[cell], domain):
            return DecompositionCheck(False, f"Remainder is negative at {cell}.", cell=cell)
    violation = signalling_violation(decomposition.remainder)
    if violation is not None:
        return DecompositionCheck(False, f"Remainder is signalling: {violation}")
    return DecompositionCheck(True)


def _check_mix(decomposition: Decomposition, target: Box) -> DecompositionCheck:
    composed = decomposition.compose()
    if composed.shape != target.shape:
        return DecompositionCheck(False, f"Shape {composed.shape} differs from {target.shape}.")
    for cell in target.cells():
        if composed[cell] != target[cell]:
            return DecompositionCheck(
                False,
                f"Mix differs from the target at {cell}: "
                f"{format_scalar(composed[cell])} != {format_scalar(target[cell])}.",
                cell=cell,
            )
    if composed.mass != target.mass:
        return DecompositionCheck(False, "Weights do not sum to the target mass.")
    return DecompositionCheck(True)


def _check_partial_remainders(
    decomposition: Decomposition, target: Box, domain: Interval | None
) -> DecompositionCheck:
    partial = np.array(target.table, dtype=object)
    for index, (weight, strategy) in enumerate(decomposition.terms):
        for u, x in enumerate(strategy.f):
            for v, y in enumerate(strategy.g):
                partial[x, y, u, v] = partial[x, y, u, v] - weight
                if not is_nonnegative(partial[x, y, u, v], domain):
                    return DecompositionCheck(
                        False,
                        f"Removing {strategy} leaves a negative entry at {(x, y, u, v)}.",
                        cell=(x, y, u, v),
                        term=index,
                    )
    return DecompositionCheck(True)


def verify_decomposition(decomposition: Decomposition, target: Box) -> DecompositionCheck:
    """Checks a decomposition against ``target`` exactly, symbolically if parameterised.

    The weights must be nonnegative on the admissible interval, the remainder must be
    nonnegative and non-signalling, the mix must equal ``target`` entrywise, and each
    partial remainder ``target - sum_{j <= i} w_j D(s_j)`` must stay nonnegative.
    """
    domain = decomposition.domain or target.domain
    result = _check_parts(decomposition, domain)
    if result:
        result = _check_mix(decomposition, target)
    if result:
        result = _check_partial_remainders(decomposition, target, domain)
    return result


def _images_with_weight(
    strategy: LocalDetStrategy, weight: Scalar
) -> list[tuple[Scalar, LocalDetStrategy]]:
    return [(weight, image) for image in depolarization_images(strategy)]


def appendix_sum() -> Box:
    """``P0 x P1/4 + P1/4 x P0``, the mass-2 sum whose local part is ``P_L``."""
    perfect = make_perfect(1)
    quarter = make_isotropic(1, Fraction(1, 4))
    return mix([1, 1], [tensor(perfect, quarter), tensor(quarter, perfect)])


def known_decomposition(name: KnownDecomposition) -> Decomposition:
    """Builds one of the printed decompositions with symbolic weights where applicable.

    ``eq3`` and ``lemma3`` decompose the isotropic box of one and two copies, ``eq5`` the
    biased single box, and ``appendix_PL`` splits :func:`appendix_sum` into the uniform mix
    of the images of :data:`APPENDIX_POINT` and a non-local rest.
    """
    if name == "eq3":
        base = LocalDetStrategy.parse("[0 0; 0 0]")
        return Decomposition(
            terms=tuple(
                (EPS / 2, s) for s in sorted(set(depolarization_images(base)))
            ),
            remainder_weight=1 - 4 * EPS,
            remainder=make_perfect(1),
            domain=ISOTROPIC_RANGE,
            name="eq3",
        )
    if name == "eq5":
        return Decomposition(
            terms=tuple((DELTA, s) for s in EQ5_STRATEGIES),
            remainder_weight=1 - 3 * DELTA,
            remainder=make_perfect(1),
            domain=BIASED_RANGE,
            name="eq5",
        )
    if name == "lemma3":
        first, second = LEMMA3_BASES
        return Decomposition(
            terms=tuple(
                _images_with_weight(first, EPS / 16 - EPS**2 / 8)
                + _images_with_weight(second, EPS**2 / 8)
            ),
            remainder_weight=1 - 4 * EPS,
            remainder=make_perfect(2),
            domain=ISOTROPIC_RANGE,
            name="lemma3",
        )
    if name == "appendix_PL":
        terms = _images_with_weight(APPENDIX_POINT, Fraction(1, 64))
        local = mix([w for w, _ in terms], [make_deterministic(s) for _, s in terms])
        target = appendix_sum()
        rest = Box(target.table - local.table, target.mass - local.mass, name="P_NL")
        return Decomposition(tuple(terms), Fraction(1), rest, name="appendix_PL")
    raise InvalidInputError(f"Unknown decomposition {name!r}.")


def decomposition_from_certificate(
    certificate: Certificate, box: Box, name: str = ""
) -> Decomposition:
    """Turns the primal weights of a certificate into a decomposition of ``box``.

    The remainder is renormalised to the mass of ``box``; a fully local box keeps itself
    as a zero-weight remainder.
    """
    terms = tuple(
        (Fraction(weight), strategy)
        for strategy, weight in sorted(certificate.primal.items())  # type: ignore[type-var]
        if weight != 0
    )
    if not terms:
        return Decomposition((), Fraction(1), box, name=name)
    local = mix([w for w, _ in terms], [make_deterministic(s) for _, s in terms])
    if local.mass == box.mass:
        return Decomposition(terms, Fraction(0), box, name=name)
    remainder = subtract_component(box, 1, local)
    weight = (box.mass - local.mass) / box.mass
    _logger.debug(f"Decomposition with local weight {local.mass} built from a certificate.")
    return Decomposition(terms, weight, remainder, name=name)


def decomposition_summary(decomposition: Decomposition) -> dict[str, object]:
    """JSON-ready description with exact weights as text."""
    return {
        "name": decomposition.name,
        "local_weight": format_scalar(decomposition.local_weight),
        "remainder_weight": format_scalar(decomposition.remainder_weight),
        "terms": [
            {"strategy": str(s), "weight": format_scalar(w)}
            for s, w in sorted(decomposition.distinct_terms().items())
        ],
    }


def orbit_sizes(strategies: Sequence[LocalDetStrategy]) -> list[int]:
    """Number of distinct images of each strategy under the group."""
    return [len(orbit(s)) for s in strategies]
