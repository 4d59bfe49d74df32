"""Exact pricing over the full set of local deterministic strategies.

For a dual vector ``y`` over cells, a strategy ``(f, g)`` has the value
``sum_{u,v} y[f(u), g(v), u, v]`` and reduced cost ``cost - value``. For a fixed ``g``
the best ``f`` is chosen per input ``u`` independently, so only Bob's tables have to
be enumerated. Bob's table is split into the half answering the first inputs and the
half answering the rest; partial sums of both halves are tabulated once and combined
blockwise in integer arithmetic.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
import logging
import math
from typing import Any
from typing import Optional

import numpy as np

from prbox.exceptions import InvalidInputError
from prbox.lp.base import CellShape
from prbox.managers import JobManager
from prbox.strategies import LocalDetStrategy
from prbox.strategies import decode_side


_logger = logging.getLogger(__name__)

# Elements of one (left rows, right rows, u, x) block of partial sums.
_BLOCK_ELEMENTS = 1 << 22
_INT64_LIMIT = 1 << 62

_Candidate = tuple[Any, int, int]


@dataclass(frozen=True)
class PricingResult:
    """Outcome of one pricing pass.

    Args:
        columns:
            Improving strategies, most improving first, ties broken by strategy index.
        reduced_costs:
            Exact reduced cost of each entry of ``columns``.
        best:
            A strategy of largest reduced cost, improving or not.
        best_reduced_cost:
            Its reduced cost; the current dual is feasible for every strategy iff this is
            at most 0.
    """

    columns: tuple[LocalDetStrategy, ...]
    reduced_costs: tuple[Fraction, ...]
    best: LocalDetStrategy
    best_reduced_cost: Fraction

    @property
    def optimal(self) -> bool:
        return self.best_reduced_cost <= 0


def _scaled_table(
    dual: Sequence[Fraction] | np.ndarray, shape: CellShape, cost: Fraction
) -> tuple[np.ndarray, int]:
    values = [Fraction(y) for y in np.asarray(dual, dtype=object).ravel()]
    if len(values) != math.prod(shape):
        raise InvalidInputError(
            f"Dual has {len(values)} entries but cells of shape {shape} need {math.prod(shape)}."
        )
    scale = math.lcm(cost.denominator, *(y.denominator for y in values))
    scaled = [int(y * scale) for y in values]
    bound = max(abs(y) for y in scaled) * shape[2] * shape[3] + abs(int(cost * scale))
    if bound < _INT64_LIMIT:
        table = np.array(scaled, dtype=np.int64)
    else:
        _logger.warning(
            "Dual values need more than 64 bits after scaling; pricing in Python integers."
        )
        table = np.array(scaled, dtype=object)
    return table.reshape(shape), scale


def _half_sums(by_input: np.ndarray, inputs: range) -> np.ndarray:
    """Partial sums over ``inputs`` for every response table of those inputs.

    Row ``i`` corresponds to the table whose digits, most significant first, are the
    outputs for ``inputs`` in order.
    """
    _, outputs, rows, columns = by_input.shape
    sums = np.zeros((1, rows, columns), dtype=by_input.dtype)
    for v in inputs:
        sums = (sums[:, None] + by_input[v][None]).reshape(-1, rows, columns)
    return sums


def _keep_best(
    values: np.ndarray, left: np.ndarray, right: np.ndarray, top_k: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Inputs are ordered by (left, right); a stable sort keeps that order among ties.
    chosen = np.sort(np.argsort(values, kind="stable")[:top_k])
    return values[chosen], left[chosen], right[chosen]


def _scan_block(
    job: tuple[np.ndarray, np.ndarray, int, Any, int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, _Candidate]:
    """Scans all pairs of a slice of left halves with every right half.

    Returns the ``top_k`` improving pairs below ``threshold`` and the overall best pair,
    with left indices shifted by ``offset``.
    """
    left, right, offset, threshold, top_k = job
    n_right = right.shape[0]
    step = max(1, _BLOCK_ELEMENTS // max(right.size, 1))
    kept_values = np.empty(0, dtype=left.dtype)
    kept_left = np.empty(0, dtype=np.int64)
    kept_right = np.empty(0, dtype=np.int64)
    best: Optional[_Candidate] = None
    for lo in range(0, left.shape[0], step):
        sums = left[lo : lo + step, None] + right[None]
        values = sums.min(axis=3).sum(axis=2)
        flat = int(np.argmin(values))
        i, j = divmod(flat, n_right)
        candidate = (values[i, j], offset + lo + i, j)
        if best is None or candidate < best:
            best = candidate
        if top_k <= 0:
            continue
        rows, cols = np.nonzero(values < threshold)
        if len(rows):
            kept_values = np.concatenate([kept_values, values[rows, cols]])
            kept_left = np.concatenate([kept_left, rows.astype(np.int64) + offset + lo])
            kept_right = np.concatenate([kept_right, cols.astype(np.int64)])
            if len(kept_values) > top_k:
                kept_values, kept_left, kept_right = _keep_best(
                    kept_values, kept_left, kept_right, top_k
                )
    assert best is not None
    return kept_values, kept_left, kept_right, best


def _best_response(table: np.ndarray, g: tuple[int, ...]) -> tuple[int, ...]:
    """Alice's cheapest output per input against Bob's table ``g``, smallest on ties."""
    _, _, inputs_a, inputs_b = table.shape
    picked = table[:, list(g), :, np.arange(inputs_b)]
    # Fancy indexing moves the v axis first: picked[v, x, u].
    totals = picked.sum(axis=0)
    return tuple(int(np.argmin(totals[:, u])) for u in range(inputs_a))


def price_strategies(
    dual: Sequence[Fraction] | np.ndarray,
    shape: CellShape,
    *,
    cost: Fraction | int = 1,
    top_k: int = 64,
    manager: JobManager | None = None,
) -> PricingResult:
    """Finds the strategies with largest reduced cost ``cost - a^T y`` exactly.

    Args:
        dual:
            One dual value per cell, in the C order of ``(x, y, u, v)``.
        shape:
            Cell layout ``(outputs_a, outputs_b, inputs_a, inputs_b)``.
        cost:
            Objective coefficient shared by all strategy columns.
        top_k:
            Largest number of improving strategies to return.
        manager:
            Optional job manager spreading the scan over workers.
    """
    cost = Fraction(cost)
    table, scale = _scaled_table(dual, shape, cost)
    outputs_a, outputs_b, inputs_a, inputs_b = shape
    threshold = int(cost * scale)

    by_input = table.transpose(3, 1, 2, 0)
    split = inputs_b // 2
    left = _half_sums(by_input, range(split))
    right = _half_sums(by_input, range(split, inputs_b))

    parts = 1 if manager is None else max(1, manager.n_workers * 4)
    bounds = np.linspace(0, left.shape[0], min(parts, left.shape[0]) + 1).astype(np.int64)
    jobs = [
        (left[lo:hi], right, int(lo), threshold, top_k)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    if manager is None or len(jobs) == 1:
        results = [_scan_block(job) for job in jobs]
    else:
        results = manager.map(_scan_block, jobs)

    candidates: list[_Candidate] = []
    for values, lefts, rights, _ in results:
        candidates.extend(zip(values.tolist(), lefts.tolist(), rights.tolist()))
    candidates.sort()
    best_value, best_left, best_right = min(r[3] for r in results)

    n_right = right.shape[0]

    def strategy(i: int, j: int) -> LocalDetStrategy:
        g = decode_side(int(i) * n_right + int(j), inputs_b, outputs_b)
        return LocalDetStrategy(_best_response(table, g), g, outputs_a, outputs_b)

    columns = tuple(strategy(i, j) for _, i, j in candidates[:top_k])
    reduced = tuple(cost - Fraction(int(value), scale) for value, _, _ in candidates[:top_k])
    best = strategy(best_left, best_right)
    best_reduced_cost = cost - Fraction(int(best_value), scale)
    _logger.debug(
        f"Pricing found {len(columns)} improving strategies; "
        f"largest reduced cost {best_reduced_cost}."
    )
    return PricingResult(columns, reduced, best, best_reduced_cost)
