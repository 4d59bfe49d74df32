"""Column generation for local-part programs.

The restricted master holds a few strategy columns and is re-solved after every batch of
columns found by exact pricing. Boxes fixed by depolarization use a reduced master with one
row per loss pattern: an optimal decomposition may be averaged over the group, and the
average of a strategy's images covers each cell of pattern ``m`` with weight
``h(m) / 8**n``, where ``h`` is the strategy's loss histogram.
"""

from __future__ import annotations

from collections.abc import Iterable
from fractions import Fraction
import logging
from typing import Callable
from typing import Optional

import numpy as np

from prbox.boxes import Box
from prbox.boxes import loss_masks
from prbox.boxes import pattern_values
from prbox.exceptions import InvalidInputError
from prbox.exceptions import LPError
from prbox.lp.base import Certificate
from prbox.lp.base import LPSolution
from prbox.lp.base import cell_row
from prbox.lp.pricing import price_strategies
from prbox.lp.simplex import ExactSimplex
from prbox.managers import JobManager
from prbox.strategies import LocalDetStrategy
from prbox.strategies import StrategyIterator
from prbox.strategies import depolarization_images
from prbox.strategies import enumerate_strategies
from prbox.strategies import loss_histogram


_logger = logging.getLogger(__name__)

RoundCallbackType = Optional[Callable[[int, Fraction, Fraction], None]]


class RestrictedMaster:
    """Local-part program of a rational box over a growing set of strategies.

    Cells with value 0 force every strategy touching them to weight 0; such strategies
    are never added, and their rows are left out of the master.

    Args:
        box:
            A box of ``n`` binary boxes with rational entries.
        symmetric:
            Use the loss-pattern master. :obj:`None` picks it whenever the box is constant
            on loss patterns.
    """

    def __init__(self, box: Box, *, symmetric: bool | None = None) -> None:
        if box.symbolic:
            raise InvalidInputError("Column generation needs a box with rational entries.")
        self.box = box
        self.n = box.n
        self._group_order = 8**self.n
        values = pattern_values(box)
        if symmetric and values is None:
            raise InvalidInputError("The symmetric master needs a box constant on loss patterns.")
        self.symmetric = values is not None if symmetric is None else symmetric

        self._flat = [Fraction(b) for b in box.table.flat]
        if self.symmetric:
            assert values is not None
            self._pattern_values = {m: Fraction(p) for m, p in values.items()}
            self._rows = sorted(m for m, p in self._pattern_values.items() if p != 0)
            rhs = [self._pattern_values[m] for m in self._rows]
        else:
            self._rows = [r for r, b in enumerate(self._flat) if b != 0]
            rhs = [self._flat[r] for r in self._rows]
        self._row_of = {key: i for i, key in enumerate(self._rows)}
        self._simplex = ExactSimplex(rhs)
        self._labels: list[LocalDetStrategy] = []
        self._seen: set[object] = set()

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    @property
    def n_columns(self) -> int:
        return len(self._labels)

    @property
    def iterations(self) -> int:
        return self._simplex.iterations

    def _column(self, strategy: LocalDetStrategy) -> tuple[object, dict[int, Fraction]] | None:
        if self.symmetric:
            histogram = loss_histogram(strategy)
            column: dict[int, Fraction] = {}
            for mask, count in enumerate(histogram):
                if count == 0:
                    continue
                if mask not in self._row_of:
                    return None
                column[self._row_of[mask]] = Fraction(count, self._group_order)
            return histogram, column
        shape = self.box.shape
        column = {}
        for u, x in enumerate(strategy.f):
            for v, y in enumerate(strategy.g):
                row = self._row_of.get(cell_row(shape, x, y, u, v))
                if row is None:
                    return None
                column[row] = Fraction(1)
        return strategy, column

    def add(self, strategies: Iterable[LocalDetStrategy]) -> int:
        """Adds the feasible strategies not yet present; returns how many were added."""
        columns, labels = [], []
        for strategy in strategies:
            keyed = self._column(strategy)
            if keyed is None or keyed[0] in self._seen:
                continue
            self._seen.add(keyed[0])
            columns.append(keyed[1])
            labels.append(strategy)
        if columns:
            self._simplex.add_columns(columns, None, labels)
            self._labels.extend(labels)
        return len(columns)

    def solve(self) -> LPSolution:
        return self._simplex.solve()

    def expanded_dual(self, solution: LPSolution) -> tuple[Fraction, ...]:
        """Dual over all cells: feasible for every strategy the master is."""
        dual = [Fraction(1) if b == 0 else Fraction(0) for b in self._flat]
        if self.symmetric:
            masks = np.broadcast_to(loss_masks(self.n), self.box.shape).ravel()
            per_pattern = {
                m: solution.dual[i] / self._group_order for i, m in enumerate(self._rows)
            }
            for cell, mask in enumerate(masks):
                if self._flat[cell] != 0:
                    dual[cell] = per_pattern[int(mask)]
        else:
            for i, cell in enumerate(self._rows):
                dual[cell] = solution.dual[i]
        return tuple(dual)

    def expanded_primal(self, solution: LPSolution) -> dict[LocalDetStrategy, Fraction]:
        """Strategy weights of the full program, spreading symmetric weights over orbits."""
        if not self.symmetric:
            return {s: w for s, w in solution.primal.items() if w != 0}  # type: ignore[misc]
        primal: dict[LocalDetStrategy, Fraction] = {}
        for strategy, weight in solution.primal.items():
            assert isinstance(strategy, LocalDetStrategy)
            share = weight / self._group_order
            for image in depolarization_images(strategy):
                primal[image] = primal.get(image, Fraction(0)) + share
        return primal

    def certificate(self, solution: LPSolution, gap: Fraction, rounds: int) -> Certificate:
        primal = self.expanded_primal(solution)
        dual = self.expanded_dual(solution)
        shape = self.box.shape
        slack = list(self._flat)
        for strategy, weight in primal.items():
            for u, x in enumerate(strategy.f):
                for v, y in enumerate(strategy.g):
                    slack[cell_row(shape, x, y, u, v)] -= weight
        certified = gap <= 0
        if certified:
            upper: Fraction | None = solution.objective
        elif gap < 1:
            dual_objective = sum((b * y for b, y in zip(self._flat, dual)), Fraction(0))
            upper = dual_objective / (1 - gap)
        else:
            upper = None
        return Certificate(
            objective=solution.objective,
            primal=primal,  # type: ignore[arg-type]
            dual=dual,
            slack=tuple(slack),
            pricing_gap=gap,
            certified=certified,
            upper_bound=upper,
            iterations=self.iterations,
            rounds=rounds,
        )


def column_generation(
    box: Box,
    *,
    symmetric: bool | None = None,
    manager: JobManager | None = None,
    max_rounds: int = 200,
    batch: int = 64,
    initial: Iterable[LocalDetStrategy] = (),
    on_round: RoundCallbackType = None,
) -> Certificate:
    """Solves the local-part program of ``box`` by column generation with exact pricing.

    Args:
        box:
            A rational box of ``n`` binary boxes.
        symmetric:
            See :class:`RestrictedMaster`.
        manager:
            Optional job manager for the pricing scans.
        max_rounds:
            Pricing rounds before giving up with a non-certified result.
        batch:
            Largest number of improving strategies added per round.
        initial:
            Strategies seeding the master.
        on_round:
            Optional callback receiving ``(round, objective, largest reduced cost)``.
    """
    master = RestrictedMaster(box, symmetric=symmetric)
    master.add(initial)
    solution = master.solve()
    gap = Fraction(1)
    for round_index in range(1, max_rounds + 1):
        dual = master.expanded_dual(solution)
        priced = price_strategies(dual, box.shape, top_k=batch, manager=manager)
        gap = priced.best_reduced_cost
        _logger.debug(
            f"Round {round_index}: objective {solution.objective}, "
            f"{master.n_columns} columns, largest reduced cost {gap}."
        )
        if on_round is not None:
            on_round(round_index, solution.objective, gap)
        if priced.optimal:
            return master.certificate(solution, gap, round_index)
        if master.add(priced.columns) == 0:
            raise LPError(
                "Pricing returned no new feasible column although one improves the master."
            )
        solution = master.solve()

    dual = master.expanded_dual(solution)
    gap = price_strategies(dual, box.shape, top_k=0, manager=manager).best_reduced_cost
    if gap > 0:
        _logger.warning(
            f"Column generation stopped after {max_rounds} rounds without proving optimality; "
            f"largest reduced cost {gap}."
        )
    return master.certificate(solution, gap, max_rounds)


def all_columns(
    box: Box, *, symmetric: bool, budget: int | None = None
) -> list[LocalDetStrategy]:
    """Every strategy the master of ``box`` can use, one per loss histogram if symmetric.

    Raises:
        BudgetExceededError:
            If the number of strategy pairs exceeds ``budget``.
    """
    n = box.n
    iterator = enumerate_strategies(n, "both", budget)
    size = 1 << n
    tables = np.array(
        [StrategyIterator(n, "alice").item(i) for i in range(size**size)], dtype=np.int64
    )
    inputs = np.arange(size)
    and_table = inputs[:, None] & inputs[None, :]
    masks = (
        tables[:, None, :, None] ^ tables[None, :, None, :] ^ and_table[None, None]
    ).reshape(len(tables) ** 2, size * size)

    if symmetric:
        values = pattern_values(box)
        assert values is not None
        histograms = np.stack([(masks == m).sum(axis=1) for m in range(size)], axis=1)
        blocked = [m for m, p in values.items() if p == 0]
        feasible = ~np.any(histograms[:, blocked] > 0, axis=1) if blocked else None
        _, first = np.unique(histograms, axis=0, return_index=True)
        chosen = sorted(int(i) for i in first if feasible is None or feasible[i])
    else:
        zero = np.array([b == 0 for b in box.table.flat], dtype=bool).reshape(box.shape)
        u, v = np.meshgrid(inputs, inputs, indexing="ij")
        touches = zero[
            tables[:, None, :, None], tables[None, :, None, :], u[None, None], v[None, None]
        ]
        chosen = np.flatnonzero(~touches.reshape(len(tables) ** 2, -1).any(axis=1)).tolist()

    strategies = [iterator.item(i) for i in chosen]
    _logger.debug(f"Full enumeration kept {len(strategies)} of {len(iterator)} strategy pairs.")
    return strategies  # type: ignore[return-value]
