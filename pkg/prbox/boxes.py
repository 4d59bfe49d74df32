"""Bipartite boxes: conditional tables ``P(x, y | u, v)`` with exact entries.

Tables are numpy object arrays indexed ``(x, y, u, v)``. For products of ``n`` binary
boxes, inputs and outputs are ``n``-bit strings and box 1 is the most significant bit,
so ``x = x_1 x_2 ... x_n`` in binary.
"""

from __future__ import annotations

from collections.abc import Iterator
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
import functools
import itertools
import logging
from typing import Any
from typing import TYPE_CHECKING

import numpy as np

from prbox.exceptions import ComponentError
from prbox.exceptions import InvalidInputError
from prbox.exceptions import ParameterRangeError
from prbox.numeric import Interval
from prbox.numeric import Poly
from prbox.numeric import Scalar
from prbox.numeric import as_scalar
from prbox.numeric import exact_divide
from prbox.numeric import format_scalar
from prbox.numeric import is_nonnegative
from prbox.numeric import poly_eval
from prbox.numeric import variable_of


if TYPE_CHECKING:
    from prbox.strategies import LocalDetStrategy


_logger = logging.getLogger(__name__)

Cell = tuple[int, int, int, int]

EPS = Poly.symbol("eps")
DELTA = Poly.symbol("delta")

ISOTROPIC_RANGE = (Fraction(0), Fraction(1, 4))
BIASED_RANGE = (Fraction(0), Fraction(1, 3))

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 12)], dtype=np.int64)


def popcount(values: Any) -> Any:
    """Bit counts of small nonnegative integers, elementwise for arrays."""
    return _POPCOUNT[values]


class Box:
    """A bipartite conditional distribution with exact entries.

    The table holds ``P(x, y | u, v)`` times the mass, so every input pair carries the same
    total ``mass``. Ordinary boxes have mass 1; sums such as ``P0 x P1/4 + P1/4 x P0``
    carry larger masses.

    Args:
        table:
            Array-like of shape ``(outputs_a, outputs_b, inputs_a, inputs_b)`` with
            :class:`~fractions.Fraction`, :class:`int` or :class:`~prbox.numeric.Poly`
            entries.
        mass:
            Total probability per input pair. Defaults to the sum over the ``u = v = 0``
            block.
        domain:
            Admissible interval of the noise parameter when entries are polynomials.
        name:
            Short label used in logs and reports.
    """

    def __init__(
        self,
        table: Any,
        mass: Scalar | int | None = None,
        *,
        domain: Interval | None = None,
        name: str = "",
    ) -> None:
        array = np.array(table, dtype=object)
        if array.ndim != 4:
            raise InvalidInputError(f"Box tables are 4-dimensional, got shape {array.shape}.")
        array = np.vectorize(as_scalar, otypes=[object])(array) if array.size else array
        array.flags.writeable = False
        self._table = array
        self._mass: Scalar = as_scalar(mass) if mass is not None else self._block_sum(0, 0)
        self._variable = variable_of(itertools.chain(array.flat, [self._mass]))
        if self._variable is not None and domain is None:
            raise InvalidInputError("Symbolic boxes need the admissible parameter interval.")
        self._domain = (Fraction(domain[0]), Fraction(domain[1])) if domain is not None else None
        self.name = name

    def _block_sum(self, u: int, v: int) -> Scalar:
        total: Scalar = Fraction(0)
        for entry in self._table[:, :, u, v].flat:
            total = total + entry
        return total

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def mass(self) -> Scalar:
        return self._mass

    @property
    def domain(self) -> Interval | None:
        return self._domain

    @property
    def variable(self) -> str | None:
        return self._variable

    @property
    def symbolic(self) -> bool:
        return self._variable is not None

    @property
    def shape(self) -> tuple[int, int, int, int]:
        x, y, u, v = self._table.shape
        return x, y, u, v

    @property
    def outputs_a(self) -> int:
        return self.shape[0]

    @property
    def outputs_b(self) -> int:
        return self.shape[1]

    @property
    def inputs_a(self) -> int:
        return self.shape[2]

    @property
    def inputs_b(self) -> int:
        return self.shape[3]

    @property
    def n(self) -> int:
        """Number of binary rounds; raises unless all alphabets have the same size ``2**n``."""
        size = self.shape[0]
        if any(s != size for s in self.shape) or size & (size - 1):
            raise InvalidInputError(f"Box of shape {self.shape} is not an n-fold binary box.")
        return size.bit_length() - 1

    def __getitem__(self, cell: Cell) -> Scalar:
        return self._table[cell]

    def cells(self) -> Iterator[Cell]:
        for index in np.ndindex(*self.shape):
            yield (index[0], index[1], index[2], index[3])

    def evaluate(self, x: int | Fraction) -> Box:
        """Substitutes a rational parameter value into every entry."""
        table = np.vectorize(lambda e: poly_eval(e, x), otypes=[object])(self._table)
        return Box(table, poly_eval(self._mass, x), name=self.name)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        if self.shape != other.shape or self._mass != other._mass:
            return False
        return all(a == b for a, b in zip(self._table.flat, other._table.flat))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        label = f"{self.name}, " if self.name else ""
        return f"Box({label}shape={self.shape}, mass={format_scalar(self._mass)})"


def _check_parameter(value: Scalar | int, name: str, default: Interval, force: bool) -> Scalar:
    value = as_scalar(value)
    if isinstance(value, Poly):
        return value
    if not 0 <= value <= 1:
        raise ParameterRangeError(f"{name}={value} leaves [0, 1]; the table would be negative.")
    lo, hi = default
    if not lo <= value <= hi:
        if not force:
            raise ParameterRangeError(
                f"{name}={value} is outside the default range [{lo}, {hi}]. "
                "Pass force=True to build it anyway."
            )
        _logger.warning(
            f"Building box with {name}={value} outside the default range [{lo}, {hi}]."
        )
    return value


def _domain_for(value: Scalar, default: Interval) -> Interval | None:
    return default if isinstance(value, Poly) and not value.is_constant() else None


def unit_box() -> Box:
    """The trivial box with one input and one output per party, mass 1."""
    return Box([[[[Fraction(1)]]]], name="unit")


def tensor(a: Box, b: Box) -> Box:
    """Independent product of two boxes; ``a`` provides the more significant bits."""
    xa, ya, ua, va = a.shape
    xb, yb, ub, vb = b.shape
    outer = np.multiply.outer(a.table, b.table)
    table = outer.transpose(0, 4, 1, 5, 2, 6, 3, 7).reshape(xa * xb, ya * yb, ua * ub, va * vb)
    domain = a.domain if a.domain is not None else b.domain
    name = f"{a.name}x{b.name}" if a.name and b.name else ""
    return Box(table, a.mass * b.mass, domain=domain, name=name)


def tensor_power(box: Box, n: int) -> Box:
    if n < 0:
        raise InvalidInputError(f"Tensor power needs n >= 0, got {n}.")
    result = unit_box()
    for _ in range(n):
        result = tensor(result, box)
    if box.domain is not None:
        result = Box(result.table, result.mass, domain=box.domain)
    return result


def _single_isotropic(eps: Scalar) -> np.ndarray:
    win = (1 - eps) / 2
    lose = eps / 2
    table = np.empty((2, 2, 2, 2), dtype=object)
    for x, y, u, v in itertools.product(range(2), repeat=4):
        table[x, y, u, v] = win if x ^ y == u & v else lose
    return table


def make_isotropic(n: int, eps: Scalar | int, *, force: bool = False) -> Box:
    """Builds ``n`` independent isotropic noisy PR boxes.

    A cell that loses ``i`` of the ``n`` rounds has entry ``(eps/2)**i (1/2 - eps/2)**(n-i)``.

    Args:
        n:
            Number of boxes; 0 gives the unit box.
        eps:
            Noise parameter, a rational in ``[0, 1/4]`` or the symbol
            :data:`~prbox.boxes.EPS`.
        force:
            Accepts rational values in ``[0, 1]`` outside the default range, with a warning.
    """
    eps = _check_parameter(eps, "eps", ISOTROPIC_RANGE, force)
    domain = _domain_for(eps, ISOTROPIC_RANGE)
    single = Box(_single_isotropic(eps), domain=domain, name="isotropic")
    box = tensor_power(single, n)
    return Box(box.table, box.mass, domain=domain, name=f"isotropic(n={n})")


def _single_biased(delta: Scalar) -> np.ndarray:
    low = (1 - delta) / 2
    high = (1 + delta) / 2
    zero = delta * 0
    table = np.empty((2, 2, 2, 2), dtype=object)
    for u, v in ((0, 0), (1, 0), (0, 1)):
        table[0, 0, u, v] = low
        table[1, 0, u, v] = zero
        table[0, 1, u, v] = delta
        table[1, 1, u, v] = low
    table[0, 0, 1, 1] = zero
    table[1, 0, 1, 1] = low
    table[0, 1, 1, 1] = high
    table[1, 1, 1, 1] = zero
    return table


def make_biased(n: int, delta: Scalar | int, *, force: bool = False) -> Box:
    """Builds ``n`` independent maximally biased noisy PR boxes.

    The noise only hits the three input pairs other than ``(1, 1)``, where ``(x, y) = (0, 1)``
    gets probability ``delta``; the ``(1, 1)`` input pair wins with certainty.

    At inputs ``(1, 1)`` the winning cell ``(x, y) = (0, 1)`` carries ``(1 + delta) / 2`` and
    ``(1, 0)`` carries ``(1 - delta) / 2``.
    """
    delta = _check_parameter(delta, "delta", BIASED_RANGE, force)
    domain = _domain_for(delta, BIASED_RANGE)
    single = Box(_single_biased(delta), domain=domain, name="biased")
    box = tensor_power(single, n)
    return Box(box.table, box.mass, domain=domain, name=f"biased(n={n})")


def make_perfect(n: int) -> Box:
    return Box(make_isotropic(n, 0).table, name=f"perfect(n={n})")


def make_uniform(n: int) -> Box:
    size = 1 << n
    table = np.full((size, size, size, size), Fraction(1, size * size), dtype=object)
    return Box(table, name=f"uniform(n={n})")


FAMILIES = ("isotropic", "biased")


def make_family(family: str, n: int, parameter: Scalar | int, *, force: bool = False) -> Box:
    """Dispatches to :func:`make_isotropic` or :func:`make_biased` by family name."""
    if family == "isotropic":
        return make_isotropic(n, parameter, force=force)
    if family == "biased":
        return make_biased(n, parameter, force=force)
    raise InvalidInputError(f"Unknown box family {family!r}; choose one of {FAMILIES}.")


def make_deterministic(strategy: LocalDetStrategy) -> Box:
    """0/1 table of a local deterministic strategy, one 1 per input pair."""
    shape = (strategy.outputs_a, strategy.outputs_b, len(strategy.f), len(strategy.g))
    table = np.full(shape, Fraction(0), dtype=object)
    for u, x in enumerate(strategy.f):
        for v, y in enumerate(strategy.g):
            table[x, y, u, v] = Fraction(1)
    return Box(table, name=str(strategy))


def signalling_violation(box: Box) -> str | None:
    """Describes the first marginal that depends on the other party's input."""
    alice = box.table.sum(axis=1)
    for x, u in itertools.product(range(box.outputs_a), range(box.inputs_a)):
        reference = alice[x, u, 0]
        for v in range(1, box.inputs_b):
            if alice[x, u, v] != reference:
                return (
                    f"Alice's marginal at x={x}, u={u} depends on v: "
                    f"{format_scalar(reference)} at v=0, {format_scalar(alice[x, u, v])} at v={v}"
                )
    bob = box.table.sum(axis=0)
    for y, v in itertools.product(range(box.outputs_b), range(box.inputs_b)):
        reference = bob[y, 0, v]
        for u in range(1, box.inputs_a):
            if bob[y, u, v] != reference:
                return (
                    f"Bob's marginal at y={y}, v={v} depends on u: "
                    f"{format_scalar(reference)} at u=0, {format_scalar(bob[y, u, v])} at u={u}"
                )
    return None


def is_nonsignalling(box: Box) -> bool:
    return signalling_violation(box) is None


def normalization_violation(box: Box) -> str | None:
    for u, v in itertools.product(range(box.inputs_a), range(box.inputs_b)):
        total = box.table[:, :, u, v].sum()
        if total != box.mass:
            return (
                f"Input pair u={u}, v={v} carries {format_scalar(total)} "
                f"instead of {format_scalar(box.mass)}"
            )
    return None


def is_normalized(box: Box) -> bool:
    return normalization_violation(box) is None


def negative_cell(box: Box) -> Cell | None:
    for cell in box.cells():
        if not is_nonnegative(box[cell], box.domain):
            return cell
    return None


def _merged_domain(parts: Sequence[Box], domain: Interval | None) -> Interval | None:
    if domain is not None:
        return domain
    for part in parts:
        if part.domain is not None:
            return part.domain
    return None


def mix(
    weights: Sequence[Scalar | int], parts: Sequence[Box], *, domain: Interval | None = None
) -> Box:
    """Weighted entrywise sum; the mass is the weighted sum of masses.

    Args:
        weights:
            One weight per part; polynomial weights need a ``domain`` unless a part has one.
        parts:
            Boxes with identical alphabets.
        domain:
            Admissible parameter interval of the result.
    """
    if not parts or len(weights) != len(parts):
        raise InvalidInputError("mix needs one weight per part and at least one part.")
    shape = parts[0].shape
    for part in parts[1:]:
        if part.shape != shape:
            raise InvalidInputError(f"Cannot mix boxes of shapes {shape} and {part.shape}.")
    table = np.full(shape, Fraction(0), dtype=object)
    mass: Scalar = Fraction(0)
    for weight, part in zip(weights, parts):
        w = as_scalar(weight)
        table = table + part.table * w
        mass = mass + w * part.mass
    return Box(table, mass, domain=_merged_domain(parts, domain))


def subtract_component(box: Box, weight: Scalar | int, part: Box) -> Box:
    """Removes ``weight * part`` from ``box`` and renormalises the remainder to ``box.mass``.

    Raises:
        ComponentError:
            If ``weight * part`` exceeds ``box`` at some cell. The error carries that cell.
    """
    if box.shape != part.shape:
        raise InvalidInputError(f"Cannot subtract shape {part.shape} from shape {box.shape}.")
    weight = as_scalar(weight)
    domain = _merged_domain([box, part], None)
    if domain is None and isinstance(weight, Poly) and not weight.is_constant():
        domain = ISOTROPIC_RANGE if weight.variable == "eps" else BIASED_RANGE
    if not is_nonnegative(weight, domain):
        raise InvalidInputError(f"Component weight {format_scalar(weight)} is negative.")

    difference = box.table - part.table * weight
    for index, entry in np.ndenumerate(difference):
        if not is_nonnegative(entry, domain):
            cell = (index[0], index[1], index[2], index[3])
            raise ComponentError(
                cell,
                f"Weighted component exceeds the box at (x, y, u, v)={cell}: "
                f"{format_scalar(box[cell])} - {format_scalar(weight)} * "
                f"{format_scalar(part[cell])} < 0",
            )

    remaining = box.mass - weight * part.mass
    if remaining == 0:
        raise InvalidInputError("Component weight exhausts the whole mass of the box.")
    table = np.vectorize(lambda e: exact_divide(e * box.mass, remaining), otypes=[object])(
        difference
    )
    return Box(table, box.mass, domain=domain)


@functools.lru_cache(maxsize=8)
def loss_masks(n: int) -> np.ndarray:
    """Per-round loss bits ``x ^ y ^ (u & v)`` for every cell of an ``n``-fold binary box."""
    size = 1 << n
    x, y, u, v = np.ix_(*(np.arange(size),) * 4)
    masks = x ^ y ^ (u & v)
    masks.flags.writeable = False
    return masks


@dataclass(frozen=True)
class ChshProfile:
    """Winning probabilities of the CHSH game per input pair.

    ``all_rounds[(u, v)]`` is the mass of outputs winning every round and
    ``per_round[(u, v)][i]`` the mass winning round ``i`` (box ``i + 1``).
    """

    all_rounds: dict[tuple[int, int], Scalar]
    per_round: dict[tuple[int, int], tuple[Scalar, ...]]


def chsh_profile(box: Box) -> ChshProfile:
    n = box.n
    masks = loss_masks(n)
    all_rounds: dict[tuple[int, int], Scalar] = {}
    per_round: dict[tuple[int, int], tuple[Scalar, ...]] = {}
    for u, v in itertools.product(range(box.inputs_a), range(box.inputs_b)):
        block = box.table[:, :, u, v]
        block_masks = masks[:, :, u, v]
        all_rounds[(u, v)] = sum(block[block_masks == 0], Fraction(0))
        per_round[(u, v)] = tuple(
            sum(block[((block_masks >> (n - 1 - i)) & 1) == 0], Fraction(0)) for i in range(n)
        )
    return ChshProfile(all_rounds, per_round)


def rounds_lost_mass(box: Box) -> dict[int, Scalar]:
    """Mass per number of lost rounds, averaged over uniformly random input pairs."""
    n = box.n
    losses = popcount(np.broadcast_to(loss_masks(n), box.shape))
    pairs = box.inputs_a * box.inputs_b
    return {k: sum(box.table[losses == k], Fraction(0)) / pairs for k in range(n + 1)}


def pattern_values(box: Box) -> dict[int, Scalar] | None:
    """Per-cell value of each loss pattern, or :obj:`None` if the box is not constant on them.

    Boxes constant on loss patterns are exactly the ones fixed by depolarization.
    """
    masks = np.broadcast_to(loss_masks(box.n), box.shape)
    values: dict[int, Scalar] = {}
    for entry, mask in zip(box.table.flat, masks.flat):
        key = int(mask)
        if key not in values:
            values[key] = entry
        elif values[key] != entry:
            return None
    return values
