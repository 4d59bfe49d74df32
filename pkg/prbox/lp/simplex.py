"""Exact revised simplex for ``max c^T x, A x <= b, x >= 0`` with ``A, b >= 0``.

The basis is stored through its structural part only. If ``S`` are the basic columns and
``T`` the rows whose slacks are nonbasic (``|S| == |T|``), every basic quantity follows
from the inverse ``N`` of the square block ``A[T, S]``::

    x_S = N b_T        y_T = c_S^T N        s_r = b_r - A[r, S] x_S  (r not in T)

Local-part programs have thousands of rows but few basic strategies, so pivots cost
``O(|S|**2)`` plus one pass over the basic columns instead of a full tableau update.
"""

from __future__ import annotations

from collections.abc import Hashable
from collections.abc import Sequence
from fractions import Fraction
import logging
import math
from typing import Literal

import numpy as np

from prbox.exceptions import BudgetExceededError
from prbox.exceptions import InvalidInputError
from prbox.exceptions import LPInfeasibleError
from prbox.exceptions import LPUnboundedError
from prbox.lp.base import Column
from prbox.lp.base import LPProblem
from prbox.lp.base import LPSolution
from prbox.lp.base import strategy_column
from prbox.strategies import enumerate_strategies


_logger = logging.getLogger(__name__)

PivotRule = Literal["bland", "dantzig"]

# Consecutive degenerate pivots tolerated before switching to Bland's rule.
_DEGENERATE_PATIENCE = 25

_STRUCTURAL = 0
_SLACK = 1


class _ColumnStore:
    """Columns in compressed form, priced against a dual vector in scaled integers."""

    def __init__(self) -> None:
        self.columns: list[dict[int, Fraction]] = []
        self.costs: list[Fraction] = []
        self._indices: list[int] = []
        self._values: list[Fraction] = []
        self._owners: list[int] = []
        self._arrays: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int, int] | None = None

    def __len__(self) -> int:
        return len(self.columns)

    def append(self, column: dict[int, Fraction], cost: Fraction) -> int:
        j = len(self.columns)
        self.columns.append(column)
        self.costs.append(cost)
        for row, value in sorted(column.items()):
            if value != 0:
                self._indices.append(row)
                self._values.append(value)
                self._owners.append(j)
        self._arrays = None
        return j

    def _compressed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int, int]:
        if self._arrays is None:
            scale = math.lcm(1, *(v.denominator for v in self._values))
            cost_scale = math.lcm(1, *(c.denominator for c in self.costs))
            self._arrays = (
                np.array(self._indices, dtype=np.int64),
                np.array([int(v * scale) for v in self._values], dtype=object),
                np.array(self._owners, dtype=np.int64),
                np.array([int(c * cost_scale) for c in self.costs], dtype=object),
                scale,
                cost_scale,
            )
        return self._arrays

    def scaled_reduced_costs(self, duals: dict[int, Fraction], n_rows: int) -> np.ndarray:
        """Reduced costs ``c_j - a_j^T y`` times a common positive integer factor."""
        indices, values, owners, costs, scale, cost_scale = self._compressed()
        dual_scale = math.lcm(1, *(y.denominator for y in duals.values()))
        scaled = np.zeros(n_rows, dtype=object)
        for row, y in duals.items():
            scaled[row] = int(y * dual_scale)
        sums = np.zeros(len(self.columns), dtype=object)
        if len(indices):
            np.add.at(sums, owners, values * scaled[indices])
        return costs * (scale * dual_scale) - sums * cost_scale

    def slack_scale(self, duals: dict[int, Fraction]) -> int:
        """Factor turning ``-y_r`` into the scale of :meth:`scaled_reduced_costs`."""
        _, _, _, _, scale, cost_scale = self._compressed()
        return scale * cost_scale * math.lcm(1, *(y.denominator for y in duals.values()))


class ExactSimplex:
    """Warm-startable exact simplex over a growing set of columns.

    Slack variables of all rows form the starting basis, which is feasible because
    ``b >= 0``. Columns added between calls to :meth:`solve` enter as nonbasic, so each
    solve continues from the previous optimal basis.

    Args:
        rhs:
            Nonnegative right-hand side ``b``.
        rule:
            ``"bland"`` always picks the lowest-index improving variable; ``"dantzig"`` picks
            the largest reduced cost and falls back to Bland's rule during long runs of
            degenerate pivots. Both terminate.
        max_iterations:
            Safety limit on the number of pivots per solve.
    """

    def __init__(
        self,
        rhs: Sequence[Fraction | int],
        *,
        rule: PivotRule = "dantzig",
        max_iterations: int = 1_000_000,
    ) -> None:
        self._b = [Fraction(v) for v in rhs]
        for row, b in enumerate(self._b):
            if b < 0:
                raise LPInfeasibleError(
                    f"Row {row} has right-hand side {b} < 0; no x >= 0 satisfies it."
                )
        if rule not in ("bland", "dantzig"):
            raise InvalidInputError(f"Unknown pivot rule {rule!r}.")
        self._m = len(self._b)
        self._rule = rule
        self._max_iterations = max_iterations
        self._store = _ColumnStore()
        self._labels: list[Hashable] = []
        self._basic: list[int] = []
        self._tight: list[int] = []
        self._inverse: list[list[Fraction]] = []
        self.iterations = 0

    @property
    def n_columns(self) -> int:
        return len(self._store)

    def add_columns(
        self,
        columns: Sequence[Column],
        costs: Sequence[Fraction | int] | None = None,
        labels: Sequence[Hashable] | None = None,
    ) -> list[int]:
        """Adds nonbasic columns and returns their indices."""
        if costs is not None and len(costs) != len(columns):
            raise InvalidInputError("One cost per column is required.")
        if labels is not None and len(labels) != len(columns):
            raise InvalidInputError("One label per column is required.")
        added = []
        for position, column in enumerate(columns):
            entries = {int(r): Fraction(a) for r, a in column.items() if a != 0}
            for row, value in entries.items():
                if not 0 <= row < self._m:
                    raise InvalidInputError(f"Column refers to missing row {row}.")
                if value < 0:
                    raise InvalidInputError(f"Column has negative entry {value} at row {row}.")
            cost = Fraction(costs[position]) if costs is not None else Fraction(1)
            j = self._store.append(entries, cost)
            self._labels.append(labels[position] if labels is not None else j)
            added.append(j)
        return added

    def _primal(self) -> list[Fraction]:
        return [
            sum((n_pq * self._b[r] for n_pq, r in zip(row, self._tight)), Fraction(0))
            for row in self._inverse
        ]

    def _dual(self) -> list[Fraction]:
        k = len(self._basic)
        costs = [self._store.costs[j] for j in self._basic]
        return [
            sum((costs[p] * self._inverse[p][q] for p in range(k)), Fraction(0)) for q in range(k)
        ]

    def _activity(self, weights: Sequence[Fraction]) -> dict[int, Fraction]:
        """``A[:, S] w`` restricted to rows where it is nonzero."""
        activity: dict[int, Fraction] = {}
        for j, w in zip(self._basic, weights):
            if w == 0:
                continue
            for row, a in self._store.columns[j].items():
                activity[row] = activity.get(row, Fraction(0)) + a * w
        return activity

    def _choose_entering(self, duals: dict[int, Fraction], bland: bool) -> tuple[int, int] | None:
        best: tuple[int, int] | None = None
        best_value = 0
        if len(self._store):
            reduced = self._store.scaled_reduced_costs(duals, self._m)
            improving = np.flatnonzero(reduced > 0)
            if len(improving):
                if bland:
                    return (_STRUCTURAL, int(improving[0]))
                j = int(improving[int(np.argmax(reduced[improving]))])
                best, best_value = (_STRUCTURAL, j), reduced[j]
        slack_scale = self._store.slack_scale(duals) if len(self._store) else 1
        for row in sorted(duals):
            value = -duals[row] * slack_scale
            if value > best_value:
                if bland and best is None:
                    return (_SLACK, row)
                best, best_value = (_SLACK, row), value
        return best

    def solve(self) -> LPSolution:
        """Runs simplex pivots from the current basis until optimality."""
        degenerate = 0
        start = self.iterations
        while True:
            if self.iterations - start >= self._max_iterations:
                raise BudgetExceededError(f"Simplex exceeded {self._max_iterations} pivots.")
            duals = {r: y for r, y in zip(self._tight, self._dual()) if y != 0}
            bland = self._rule == "bland" or degenerate >= _DEGENERATE_PATIENCE
            entering = self._choose_entering(duals, bland)
            if entering is None:
                break
            d_basic, d_rows = self._direction(entering)
            ratio, leaving = self._ratio_test(entering, d_basic, d_rows)
            degenerate = degenerate + 1 if ratio == 0 else 0
            self._pivot(entering, leaving, d_basic, d_rows)
            self.iterations += 1
            _logger.debug(f"Pivot {self.iterations}: {entering} enters, {leaving} leaves.")

        x_basic = self._primal()
        primal = {self._labels[j]: x for j, x in zip(self._basic, x_basic) if x != 0}
        dual = [Fraction(0)] * self._m
        for r, y in zip(self._tight, self._dual()):
            dual[r] = y
        objective = sum(
            (self._store.costs[j] * x for j, x in zip(self._basic, x_basic)), Fraction(0)
        )
        return LPSolution(primal, tuple(dual), objective, self.iterations)

    def _direction(
        self, entering: tuple[int, int]
    ) -> tuple[list[Fraction], dict[int, Fraction]]:
        """Rates at which basic structurals and loose slacks decrease as ``entering`` grows."""
        kind, index = entering
        if kind == _STRUCTURAL:
            column = self._store.columns[index]
            entering_rows = [column.get(r, Fraction(0)) for r in self._tight]
            d_basic = [
                sum((n_pq * a for n_pq, a in zip(row, entering_rows)), Fraction(0))
                for row in self._inverse
            ]
            d_rows = dict(column)
        else:
            q0 = self._tight.index(index)
            d_basic = [row[q0] for row in self._inverse]
            d_rows = {}
        for row, a in self._activity(d_basic).items():
            d_rows[row] = d_rows.get(row, Fraction(0)) - a
        for r in self._tight:
            d_rows.pop(r, None)
        return d_basic, d_rows

    def _ratio_test(
        self, entering: tuple[int, int], d_basic: list[Fraction], d_rows: dict[int, Fraction]
    ) -> tuple[Fraction, tuple[int, int]]:
        x_basic = self._primal()
        activity = self._activity(x_basic)
        # Candidates are ordered by step length, then by Bland's variable order.
        candidates = [
            (x_basic[p] / d, (_STRUCTURAL, self._basic[p]), (_STRUCTURAL, p))
            for p, d in enumerate(d_basic)
            if d > 0
        ]
        candidates.extend(
            ((self._b[r] - activity.get(r, Fraction(0))) / d, (_SLACK, r), (_SLACK, r))
            for r, d in d_rows.items()
            if d > 0
        )
        if not candidates:
            raise LPUnboundedError(
                f"Entering variable {entering} can grow without bound; "
                "local-part programs are bounded, so the problem is malformed."
            )
        ratio, _, leaving = min(candidates)
        return ratio, leaving

    def _row_times_inverse(self, row: int) -> list[Fraction]:
        """``A[row, S] N`` as a vector over the tight rows."""
        k = len(self._basic)
        w = [Fraction(0)] * k
        for p, j in enumerate(self._basic):
            a = self._store.columns[j].get(row)
            if a:
                inverse_row = self._inverse[p]
                for q in range(k):
                    w[q] += a * inverse_row[q]
        return w

    def _pivot(
        self,
        entering: tuple[int, int],
        leaving: tuple[int, int],
        d_basic: list[Fraction],
        d_rows: dict[int, Fraction],
    ) -> None:
        kind_in, index_in = entering
        kind_out, index_out = leaving
        if kind_in == _STRUCTURAL and kind_out == _SLACK:
            self._grow(index_in, index_out, d_basic, d_rows[index_out])
        elif kind_in == _STRUCTURAL:
            self._replace_column(index_in, index_out, d_basic)
        elif kind_out == _SLACK:
            self._replace_row(self._tight.index(index_in), index_out)
        else:
            self._shrink(self._tight.index(index_in), index_out)

    def _grow(self, column: int, row: int, d_basic: list[Fraction], sigma: Fraction) -> None:
        """The column enters the basis and its blocking row becomes tight."""
        inverse = self._inverse
        k = len(self._basic)
        w = self._row_times_inverse(row)
        grown = [
            [inverse[p][q] + d_basic[p] * w[q] / sigma for q in range(k)] + [-d_basic[p] / sigma]
            for p in range(k)
        ]
        grown.append([-w[q] / sigma for q in range(k)] + [1 / sigma])
        self._inverse = grown
        self._basic.append(column)
        self._tight.append(row)

    def _replace_column(self, column: int, p0: int, d_basic: list[Fraction]) -> None:
        inverse = self._inverse
        pivot_row = [value / d_basic[p0] for value in inverse[p0]]
        for p, factor in enumerate(d_basic):
            if p != p0 and factor != 0:
                inverse[p] = [a - factor * b for a, b in zip(inverse[p], pivot_row)]
        inverse[p0] = pivot_row
        self._basic[p0] = column

    def _replace_row(self, q0: int, row: int) -> None:
        """Tight row ``q0`` is released and ``row`` becomes tight in its place."""
        w = self._row_times_inverse(row)
        w[q0] -= 1
        pivot = w[q0] + 1
        for p, inverse_row in enumerate(self._inverse):
            factor = inverse_row[q0] / pivot
            if factor != 0:
                self._inverse[p] = [a - factor * wq for a, wq in zip(inverse_row, w)]
        self._tight[q0] = row

    def _shrink(self, q0: int, p0: int) -> None:
        """A structural leaves together with the tight row ``q0``."""
        inverse = self._inverse
        k = len(self._basic)
        pivot = inverse[p0][q0]
        self._inverse = [
            [inverse[p][q] - inverse[p][q0] * inverse[p0][q] / pivot for q in range(k) if q != q0]
            for p in range(k)
            if p != p0
        ]
        del self._basic[p0]
        del self._tight[q0]


def _zero_row_closure(
    problem: LPProblem, rhs: list[Fraction]
) -> tuple[list[int], list[int], list[int]]:
    """Splits rows into kept and zero rows, and columns into kept and forced-zero ones."""
    zero_rows = {r for r, b in enumerate(rhs) if b == 0}
    kept_rows = [r for r in range(len(rhs)) if r not in zero_rows]
    kept_columns, dropped_columns = [], []
    assert problem.columns is not None
    for j, column in enumerate(problem.columns):
        if any(r in zero_rows and a > 0 for r, a in column.items()):
            dropped_columns.append(j)
        else:
            kept_columns.append(j)
    return kept_rows, kept_columns, dropped_columns


def solve_exact(
    problem: LPProblem,
    *,
    rule: PivotRule = "dantzig",
    budget: int | None = None,
) -> LPSolution:
    """Solves an :class:`LPProblem` over its finite column set in exact arithmetic.

    Rows with ``b_r = 0`` force every column touching them to zero. Those rows and columns
    are removed before pivoting; afterwards each such row gets the smallest dual value
    that keeps the removed columns dual feasible, which leaves ``b^T y`` unchanged.

    Args:
        problem:
            A problem with rational right-hand side. Implicit strategy column sets are
            enumerated in full.
        rule:
            Pivot rule, see :class:`ExactSimplex`.
        budget:
            Largest number of strategy pairs an implicit problem may enumerate.
    """
    if problem.implicit:
        shape = problem.shape
        assert shape is not None
        size = shape[0]
        if any(s != size for s in shape) or size & (size - 1):
            raise InvalidInputError("Implicit column sets need an n-fold binary cell layout.")
        strategies = list(enumerate_strategies(size.bit_length() - 1, "both", budget))
        problem = LPProblem(
            rhs=problem.rhs,
            columns=tuple(strategy_column(s, shape) for s in strategies),
            labels=tuple(strategies),
            shape=shape,
        )

    rhs = problem.rational_rhs()
    for row, b in enumerate(rhs):
        if b < 0:
            raise LPInfeasibleError(f"Row {row} has right-hand side {b} < 0.")
    assert problem.columns is not None
    kept_rows, kept_columns, dropped_columns = _zero_row_closure(problem, rhs)
    position = {r: i for i, r in enumerate(kept_rows)}
    labels = problem.column_labels()
    costs = problem.objective or tuple(Fraction(1) for _ in problem.columns)

    simplex = ExactSimplex([rhs[r] for r in kept_rows], rule=rule)
    simplex.add_columns(
        [{position[r]: a for r, a in problem.columns[j].items()} for j in kept_columns],
        [costs[j] for j in kept_columns],
        [labels[j] for j in kept_columns],
    )
    reduced = simplex.solve()

    dual = [Fraction(0)] * len(rhs)
    for i, r in enumerate(kept_rows):
        dual[r] = reduced.dual[i]
    for j in dropped_columns:
        column = problem.columns[j]
        deficit = costs[j] - sum((a * dual[r] for r, a in column.items()), Fraction(0))
        if deficit > 0:
            row, a = next((r, a) for r, a in sorted(column.items()) if rhs[r] == 0 and a > 0)
            dual[row] += deficit / a

    _logger.debug(
        f"Solved LP with {len(kept_rows)} rows and {len(kept_columns)} columns "
        f"in {reduced.iterations} pivots; objective {reduced.objective}."
    )
    return LPSolution(reduced.primal, tuple(dual), reduced.objective, reduced.iterations)
