"""Local deterministic strategies and the depolarization group acting on them.

The depolarization group used throughout prbox is the group of local reversible
relabelings that fix the perfect PR box. Per box it has 8 elements ``(alpha, beta, b)``,
each a bit, acting on a cell as::

    u' = u ^ alpha
    v' = v ^ beta
    x' = x ^ (beta & u) ^ b
    y' = y ^ (alpha & v) ^ b ^ (alpha & beta)

For ``n`` boxes the parameters become ``n``-bit masks and the group has ``8**n`` elements.
The relabeling keeps the per-round win/lose pattern of every cell.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
import itertools
import logging
import re
from typing import Literal
from typing import overload
from typing import Union

import numpy as np

from prbox.boxes import Box
from prbox.boxes import make_deterministic
from prbox.boxes import popcount
from prbox.exceptions import BudgetExceededError
from prbox.exceptions import InvalidInputError
from prbox.numeric import Poly
from prbox.numeric import Scalar
from prbox.numeric import poly_eval


_logger = logging.getLogger(__name__)

Side = Literal["both", "alice", "bob"]
DEFAULT_BUDGET = 10**8

DEPOLARIZATION_DEFINITION = (
    "depolarization element (alpha, beta, b) acts per box as "
    "u'=u^alpha, v'=v^beta, x'=x^(beta&u)^b, y'=y^(alpha&v)^b^(alpha&beta); "
    "composition (a1,b1,c1) then (a2,b2,c2) = (a1^a2, b1^b2, c1^c2^(b2&a1))"
)


@dataclass(frozen=True, order=True)
class LocalDetStrategy:
    """A pair of deterministic response functions ``x = f(u)`` and ``y = g(v)``.

    Args:
        f:
            Alice's output for each of her inputs.
        g:
            Bob's output for each of his inputs.
        outputs_a:
            Size of Alice's output alphabet.
        outputs_b:
            Size of Bob's output alphabet.
    """

    f: tuple[int, ...]
    g: tuple[int, ...]
    outputs_a: int
    outputs_b: int

    def __post_init__(self) -> None:
        if any(not 0 <= x < self.outputs_a for x in self.f):
            raise InvalidInputError(f"Alice's outputs {self.f} leave range({self.outputs_a}).")
        if any(not 0 <= y < self.outputs_b for y in self.g):
            raise InvalidInputError(f"Bob's outputs {self.g} leave range({self.outputs_b}).")

    @classmethod
    def binary(
        cls, f: tuple[int, ...] | list[int], g: tuple[int, ...] | list[int]
    ) -> LocalDetStrategy:
        """Strategy for ``n`` binary boxes, where all alphabets have ``len(f)`` letters."""
        size = len(f)
        if len(g) != size or size & (size - 1) or size == 0:
            raise InvalidInputError(
                "Binary strategies need two tables of equal power-of-two length."
            )
        return cls(tuple(int(x) for x in f), tuple(int(y) for y in g), size, size)

    @classmethod
    def parse(cls, text: str) -> LocalDetStrategy:
        """Reads the ``"[x0 x1 ...; y0 y1 ...]"`` text form of a binary strategy."""
        match = re.fullmatch(r"\s*\[([\d\s]*);([\d\s]*)\]\s*", text)
        if match is None:
            raise InvalidInputError(f"{text!r} is not of the form '[x0 x1 ...; y0 y1 ...]'.")
        f = [int(token) for token in match.group(1).split()]
        g = [int(token) for token in match.group(2).split()]
        return cls.binary(f, g)

    @property
    def n(self) -> int:
        size = len(self.f)
        if size != len(self.g) or size & (size - 1) or {self.outputs_a, self.outputs_b} != {size}:
            raise InvalidInputError(f"{self} is not a strategy for binary boxes.")
        return size.bit_length() - 1

    def __str__(self) -> str:
        return f"[{' '.join(map(str, self.f))}; {' '.join(map(str, self.g))}]"


def encode_side(table: tuple[int, ...], outputs: int) -> int:
    """Index of a response table, the output for input 0 being the most significant digit."""
    index = 0
    for value in table:
        index = index * outputs + value
    return index


def decode_side(index: int, inputs: int, outputs: int) -> tuple[int, ...]:
    digits = [0] * inputs
    for position in range(inputs - 1, -1, -1):
        index, digits[position] = divmod(index, outputs)
    return tuple(digits)


def strategy_count(n: int, side: Side = "both") -> int:
    per_side = (1 << n) ** (1 << n)
    return per_side * per_side if side == "both" else per_side


class StrategyIterator:
    """Lazy cursor over strategy indices ``[start, stop)``.

    For ``side="both"`` the index is ``alice_index * per_side + bob_index`` and items are
    :class:`LocalDetStrategy`. For a single side the items are response tables. Nothing
    is materialised; :meth:`partition` splits the range for parallel scans.
    """

    def __init__(
        self, n: int, side: Side = "both", start: int = 0, stop: int | None = None
    ) -> None:
        self.n = n
        self.side = side
        self._size = 1 << n
        self._per_side = strategy_count(n, "alice")
        total = strategy_count(n, side)
        self.start = start
        self.stop = total if stop is None else min(stop, total)
        self._cursor = start

    def __len__(self) -> int:
        return max(self.stop - self.start, 0)

    def __iter__(self) -> StrategyIterator:
        return self

    def __next__(self) -> Union[LocalDetStrategy, tuple[int, ...]]:
        if self._cursor >= self.stop:
            raise StopIteration
        item = self.item(self._cursor)
        self._cursor += 1
        return item

    def item(self, index: int) -> Union[LocalDetStrategy, tuple[int, ...]]:
        if self.side != "both":
            return decode_side(index, self._size, self._size)
        alice, bob = divmod(index, self._per_side)
        f = decode_side(alice, self._size, self._size)
        g = decode_side(bob, self._size, self._size)
        return LocalDetStrategy(f, g, self._size, self._size)

    def clone(self) -> StrategyIterator:
        """Fresh iterator over the same range, restarting at ``start``."""
        return StrategyIterator(self.n, self.side, self.start, self.stop)

    def partition(self, parts: int) -> list[StrategyIterator]:
        parts = max(1, parts)
        bounds = np.linspace(self.start, self.stop, parts + 1).astype(np.int64)
        return [
            StrategyIterator(self.n, self.side, int(lo), int(hi))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]


def enumerate_strategies(
    n: int, side: Side = "both", budget: int | None = None
) -> StrategyIterator:
    """Enumerates all local deterministic strategies of ``n`` binary boxes.

    Args:
        n:
            Number of boxes, at least 1.
        side:
            ``"both"`` for strategy pairs, ``"alice"`` or ``"bob"`` for one party's tables.
        budget:
            Largest admissible count of strategy pairs for ``side="both"``.
    """
    if n < 1:
        raise InvalidInputError(f"Strategy enumeration needs n >= 1, got {n}.")
    if side not in ("both", "alice", "bob"):
        raise InvalidInputError(f"Unknown side {side!r}.")
    budget = DEFAULT_BUDGET if budget is None else budget
    count = strategy_count(n, side)
    if side == "both" and count > budget:
        raise BudgetExceededError(
            f"Enumerating {count} strategy pairs for n={n} exceeds the budget of {budget}."
        )
    return StrategyIterator(n, side)


def product(first: LocalDetStrategy, second: LocalDetStrategy) -> LocalDetStrategy:
    """Blockwise product; ``first`` acts on the more significant part of every input."""
    inputs_a, inputs_b = len(second.f), len(second.g)
    f = tuple(
        first.f[u // inputs_a] * second.outputs_a + second.f[u % inputs_a]
        for u in range(len(first.f) * inputs_a)
    )
    g = tuple(
        first.g[v // inputs_b] * second.outputs_b + second.g[v % inputs_b]
        for v in range(len(first.g) * inputs_b)
    )
    outputs_a = first.outputs_a * second.outputs_a
    return LocalDetStrategy(f, g, outputs_a, first.outputs_b * second.outputs_b)


def _factors(table: tuple[int, ...], low_bits: int) -> bool:
    low_mask = (1 << low_bits) - 1
    for u, out in enumerate(table):
        if out >> low_bits != table[u & ~low_mask] >> low_bits:
            return False
        if out & low_mask != table[u & low_mask] & low_mask:
            return False
    return True


def is_product(strategy: LocalDetStrategy, split: int) -> bool:
    """Whether the first ``split`` boxes and the remaining ones are answered independently."""
    n = strategy.n
    if not 0 < split < n:
        raise InvalidInputError(f"split must lie strictly between 0 and {n}, got {split}.")
    return _factors(strategy.f, n - split) and _factors(strategy.g, n - split)


@dataclass(frozen=True)
class DepolElement:
    """An element of the depolarization group; each field is an ``n``-bit mask."""

    alpha: int
    beta: int
    b: int

    def compose(self, then: DepolElement) -> DepolElement:
        """The element applying ``self`` first and ``then`` second."""
        return DepolElement(
            self.alpha ^ then.alpha,
            self.beta ^ then.beta,
            self.b ^ then.b ^ (then.beta & self.alpha),
        )

    def apply_cell(self, x: int, y: int, u: int, v: int) -> tuple[int, int, int, int]:
        return (
            x ^ (self.beta & u) ^ self.b,
            y ^ (self.alpha & v) ^ self.b ^ (self.alpha & self.beta),
            u ^ self.alpha,
            v ^ self.beta,
        )


def group(n: int) -> Iterator[DepolElement]:
    """All ``8**n`` elements, ordered by ``(alpha, beta, b)``."""
    size = 1 << n
    for alpha, beta, b in itertools.product(range(size), repeat=3):
        yield DepolElement(alpha, beta, b)


def _apply_to_strategy(element: DepolElement, strategy: LocalDetStrategy) -> LocalDetStrategy:
    size = len(strategy.f)
    f = tuple(
        strategy.f[u ^ element.alpha] ^ (element.beta & (u ^ element.alpha)) ^ element.b
        for u in range(size)
    )
    g = tuple(
        strategy.g[v ^ element.beta]
        ^ (element.alpha & (v ^ element.beta))
        ^ element.b
        ^ (element.alpha & element.beta)
        for v in range(size)
    )
    return LocalDetStrategy(f, g, strategy.outputs_a, strategy.outputs_b)


def _apply_to_box(element: DepolElement, box: Box) -> Box:
    size = 1 << box.n
    x, y, u, v = np.ix_(*(np.arange(size),) * 4)
    shape = box.shape
    xp = np.broadcast_to(x ^ (element.beta & u) ^ element.b, shape)
    bob_flip = element.b ^ (element.alpha & element.beta)
    yp = np.broadcast_to(y ^ (element.alpha & v) ^ bob_flip, shape)
    up = np.broadcast_to(u ^ element.alpha, shape)
    vp = np.broadcast_to(v ^ element.beta, shape)
    table = np.empty(shape, dtype=object)
    table[xp, yp, up, vp] = box.table
    return Box(table, box.mass, domain=box.domain, name=box.name)


@overload
def apply_depol(element: DepolElement, target: Box) -> Box:
    ...


@overload
def apply_depol(element: DepolElement, target: LocalDetStrategy) -> LocalDetStrategy:
    ...


def apply_depol(element: DepolElement, target: Box | LocalDetStrategy) -> Box | LocalDetStrategy:
    """Relabels a box or a strategy with a depolarization element."""
    if isinstance(target, LocalDetStrategy):
        return _apply_to_strategy(element, target)
    return _apply_to_box(element, target)


def depolarization_images(strategy: LocalDetStrategy) -> list[LocalDetStrategy]:
    """Images under every group element, with multiplicity, in group order."""
    return [_apply_to_strategy(e, strategy) for e in group(strategy.n)]


def orbit(strategy: LocalDetStrategy) -> frozenset[LocalDetStrategy]:
    """Distinct strategies reachable under the group; the size divides ``8**n``."""
    return frozenset(depolarization_images(strategy))


def depolarize(target: Box | LocalDetStrategy) -> Box:
    """Uniform average over the whole group of the relabeled box (or strategy box)."""
    box = make_deterministic(target) if isinstance(target, LocalDetStrategy) else target
    elements = list(group(box.n))
    total = np.full(box.shape, Fraction(0), dtype=object)
    for element in elements:
        total = total + _apply_to_box(element, box).table
    weight = Fraction(1, len(elements))
    return Box(total * weight, box.mass, domain=box.domain)


def loss_matrix(strategy: LocalDetStrategy) -> np.ndarray:
    """Loss masks ``f(u) ^ g(v) ^ (u & v)`` indexed ``[u, v]``."""
    size = len(strategy.f)
    f = np.array(strategy.f, dtype=np.int64)[:, None]
    g = np.array(strategy.g, dtype=np.int64)[None, :]
    inputs = np.arange(size, dtype=np.int64)
    return f ^ g ^ (inputs[:, None] & inputs[None, :])


def rounds_lost(strategy: LocalDetStrategy, u: int, v: int) -> int:
    """Number of rounds with ``f(u)_i ^ g(v)_i != u_i & v_i``."""
    return bin(strategy.f[u] ^ strategy.g[v] ^ (u & v)).count("1")


def worst_input(strategy: LocalDetStrategy) -> tuple[int, int, int]:
    """The input pair losing most rounds, lexicographically smallest among ties."""
    losses = popcount(loss_matrix(strategy))
    u, v = np.unravel_index(int(np.argmax(losses)), losses.shape)
    return int(u), int(v), int(losses[u, v])


def loss_histogram(strategy: LocalDetStrategy) -> tuple[int, ...]:
    """Number of input pairs producing each loss mask, indexed by the mask."""
    size = len(strategy.f)
    counts = np.bincount(loss_matrix(strategy).ravel(), minlength=size)
    return tuple(int(c) for c in counts)


def max_weight(strategy: LocalDetStrategy, box: Box, probe: Fraction = Fraction(1, 8)) -> Scalar:
    """Largest weight the strategy can take in a decomposition of ``box``.

    This is the smallest box entry on the strategy's support. Among polynomial entries the
    one smallest at ``probe`` is returned.
    """
    if (box.outputs_a, box.outputs_b, box.inputs_a, box.inputs_b) != (
        strategy.outputs_a,
        strategy.outputs_b,
        len(strategy.f),
        len(strategy.g),
    ):
        raise InvalidInputError(f"Strategy {strategy} does not match box of shape {box.shape}.")
    support = [
        box[strategy.f[u], strategy.g[v], u, v]
        for u in range(len(strategy.f))
        for v in range(len(strategy.g))
    ]
    if not any(isinstance(entry, Poly) for entry in support):
        return min(support)
    best = min(range(len(support)), key=lambda i: poly_eval(support[i], probe))
    _logger.debug(f"max_weight of {strategy} compared symbolic entries at {probe}.")
    return support[best]


def biased_feasible(strategy: LocalDetStrategy) -> bool:
    """Necessary conditions for positive weight against maximally biased boxes.

    In every round, inputs ``(1, 1)`` need different outputs and any other input pair must
    avoid ``(x, y) = (1, 0)``.
    """
    n = strategy.n
    size = 1 << n
    for u, v in itertools.product(range(size), repeat=2):
        x, y = strategy.f[u], strategy.g[v]
        for i in range(n):
            ui, vi, xi, yi = (u >> i) & 1, (v >> i) & 1, (x >> i) & 1, (y >> i) & 1
            if ui and vi:
                if xi == yi:
                    return False
            elif xi and not yi:
                return False
    return True
