from __future__ import annotations

from collections.abc import Hashable
from collections.abc import Iterable
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
import functools

from prbox.boxes import Box
from prbox.exceptions import InvalidInputError
from prbox.numeric import Scalar
from prbox.numeric import as_scalar
from prbox.numeric import format_rational
from prbox.numeric import poly_eval
from prbox.strategies import LocalDetStrategy


Column = Mapping[int, Fraction]
CellShape = tuple[int, int, int, int]


def cell_row(shape: CellShape, x: int, y: int, u: int, v: int) -> int:
    """Row of cell ``(x, y, u, v)``; rows follow the C order of the box table."""
    _, ys, us, vs = shape
    return ((x * ys + y) * us + u) * vs + v


def strategy_column(strategy: LocalDetStrategy, shape: CellShape) -> dict[int, Fraction]:
    one = Fraction(1)
    return {
        cell_row(shape, x, y, u, v): one
        for u, x in enumerate(strategy.f)
        for v, y in enumerate(strategy.g)
    }


@dataclass(frozen=True)
class LPProblem:
    """``max c^T x`` subject to ``A x <= b`` and ``x >= 0``.

    Columns are sparse maps from row to a nonnegative coefficient. Local-part problems
    have one row per box cell and one 0/1 column per local deterministic strategy; their
    column set may stay implicit (``columns=None``), meaning every strategy of the box's
    alphabets.

    Args:
        rhs:
            Right-hand side ``b``; polynomial entries must be evaluated with :meth:`at`
            before solving.
        columns:
            Explicit columns, or :obj:`None` for the implicit strategy column set.
        labels:
            One hashable label per explicit column. Defaults to the column index.
        objective:
            Cost of each explicit column. Defaults to all ones.
        shape:
            Cell layout of the rows of a local-part problem.
    """

    rhs: tuple[Scalar, ...]
    columns: tuple[Column, ...] | None = None
    labels: tuple[Hashable, ...] | None = None
    objective: tuple[Fraction, ...] | None = None
    shape: CellShape | None = None
    domain: tuple[Fraction, Fraction] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.columns is None and self.shape is None:
            raise InvalidInputError("Implicit column sets need the cell shape of the box.")
        if self.columns is not None:
            if self.labels is not None and len(self.labels) != len(self.columns):
                raise InvalidInputError("One label per column is required.")
            if self.objective is not None and len(self.objective) != len(self.columns):
                raise InvalidInputError("One cost per column is required.")
            for j, column in enumerate(self.columns):
                for row, value in column.items():
                    if not 0 <= row < len(self.rhs):
                        raise InvalidInputError(f"Column {j} refers to missing row {row}.")
                    if value < 0:
                        raise InvalidInputError(f"Column {j} has a negative entry at row {row}.")

    @classmethod
    def explicit(
        cls,
        columns: Sequence[Column],
        rhs: Sequence[Scalar | int],
        objective: Sequence[Fraction | int] | None = None,
        labels: Sequence[Hashable] | None = None,
    ) -> LPProblem:
        return cls(
            rhs=tuple(as_scalar(b) for b in rhs),
            columns=tuple({r: Fraction(a) for r, a in c.items()} for c in columns),
            labels=tuple(labels) if labels is not None else None,
            objective=tuple(Fraction(c) for c in objective) if objective is not None else None,
        )

    @classmethod
    def local_part(
        cls, box: Box, strategies: Iterable[LocalDetStrategy] | None = None
    ) -> LPProblem:
        """The local-part program of ``box``: rows are cells, columns are strategies."""
        rhs = tuple(box.table.flat)
        if strategies is None:
            return cls(rhs=rhs, shape=box.shape, domain=box.domain)
        chosen = tuple(strategies)
        return cls(
            rhs=rhs,
            columns=tuple(strategy_column(s, box.shape) for s in chosen),
            labels=chosen,
            shape=box.shape,
            domain=box.domain,
        )

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def implicit(self) -> bool:
        return self.columns is None

    @functools.cached_property
    def _label_index(self) -> dict[Hashable, int]:
        assert self.columns is not None
        labels = self.labels if self.labels is not None else range(len(self.columns))
        return {label: j for j, label in enumerate(labels)}

    def column_labels(self) -> list[Hashable]:
        if self.columns is None:
            raise InvalidInputError("Implicit problems have no explicit column list.")
        return list(self.labels) if self.labels is not None else list(range(len(self.columns)))

    def column(self, label: Hashable) -> Column:
        if self.columns is None:
            if not isinstance(label, LocalDetStrategy):
                raise InvalidInputError(f"{label!r} is not a strategy.")
            assert self.shape is not None
            x, y, u, v = self.shape
            if (label.outputs_a, label.outputs_b, len(label.f), len(label.g)) != (x, y, u, v):
                raise InvalidInputError(
                    f"Strategy {label} does not fit cells of shape {self.shape}."
                )
            return strategy_column(label, self.shape)
        try:
            return self.columns[self._label_index[label]]
        except KeyError:
            raise InvalidInputError(f"Unknown column {label!r}.") from None

    def cost(self, label: Hashable) -> Fraction:
        if self.columns is None or self.objective is None:
            return Fraction(1)
        return self.objective[self._label_index[label]]

    def at(self, point: int | Fraction) -> LPProblem:
        """The same problem with a rational parameter value substituted into ``b``."""
        return LPProblem(
            rhs=tuple(poly_eval(b, point) for b in self.rhs),
            columns=self.columns,
            labels=self.labels,
            objective=self.objective,
            shape=self.shape,
        )

    def rational_rhs(self) -> list[Fraction]:
        rhs = []
        for row, b in enumerate(self.rhs):
            if not isinstance(b, Fraction):
                raise InvalidInputError(
                    f"Row {row} has symbolic right-hand side {b}; substitute a value with at()."
                )
            rhs.append(b)
        return rhs


@dataclass(frozen=True)
class LPSolution:
    """Optimal basic solution of an :class:`LPProblem`.

    ``primal`` holds the positive weights by column label and ``dual`` one value per row.
    """

    primal: dict[Hashable, Fraction]
    dual: tuple[Fraction, ...]
    objective: Fraction
    iterations: int = 0


@dataclass(frozen=True)
class Certificate:
    """Matched primal and dual solutions proving the value of a local-part program.

    Args:
        objective:
            Value of the primal decomposition, ``sum_i x_i``.
        primal:
            Positive strategy weights.
        dual:
            One dual value per row.
        slack:
            ``b - A x`` per row.
        pricing_gap:
            Largest reduced cost over the full column set under ``dual``; at most 0 for a
            certified optimum.
        certified:
            :obj:`False` when the solver stopped before proving optimality.
        upper_bound:
            A proven upper bound on the optimum, equal to ``objective`` when certified.
        iterations:
            Simplex pivots spent.
        rounds:
            Column generation rounds spent.
    """

    objective: Fraction
    primal: dict[Hashable, Fraction]
    dual: tuple[Fraction, ...]
    slack: tuple[Fraction, ...]
    pricing_gap: Fraction | None
    certified: bool = True
    upper_bound: Fraction | None = None
    iterations: int = 0
    rounds: int = 0

    def with_primal_weight(self, label: Hashable, weight: Fraction) -> Certificate:
        """Copy with one primal weight replaced, for audit tests."""
        primal = dict(self.primal)
        primal[label] = weight
        return Certificate(
            self.objective,
            primal,
            self.dual,
            self.slack,
            self.pricing_gap,
            self.certified,
            self.upper_bound,
            self.iterations,
            self.rounds,
        )

    def summary(self) -> str:
        status = "certified" if self.certified else "NOT certified"
        gap = format_rational(self.pricing_gap) if self.pricing_gap is not None else "n/a"
        return (
            f"objective {format_rational(self.objective)} ({status}), "
            f"{len(self.primal)} strategies, pricing gap {gap}"
        )


@dataclass(frozen=True)
class CertificateCheck:
    """Outcome of an independent certificate audit; truthy when every check passed."""

    ok: bool
    message: str = "certificate verified"
    index: int | None = None

    def __bool__(self) -> bool:
        return self.ok
