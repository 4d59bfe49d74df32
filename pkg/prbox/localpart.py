"""Local parts of boxes and the closed-form envelopes for noisy PR boxes."""

from __future__ import annotations

from fractions import Fraction
import logging
import math
from typing import Literal
from typing import NamedTuple

import numpy as np

from prbox.boxes import Box
from prbox.boxes import loss_masks
from prbox.exceptions import BudgetExceededError
from prbox.exceptions import InvalidInputError
from prbox.lp import Certificate
from prbox.lp import RestrictedMaster
from prbox.lp import all_columns
from prbox.lp import column_generation
from prbox.lp import price_strategies
from prbox.lp.colgen import RoundCallbackType
from prbox.managers import JobManager
from prbox.numeric import Scalar
from prbox.numeric import as_scalar


_logger = logging.getLogger(__name__)

SolveMode = Literal["full", "colgen"]


class LocalPart(NamedTuple):
    """Local part of a box as a fraction of its mass, with the certificate proving it."""

    fraction: Fraction
    certificate: Certificate

    @property
    def absolute(self) -> Fraction:
        """Local mass before normalisation, i.e. the LP objective."""
        return self.certificate.objective


def _solve_full(
    box: Box, symmetric: bool | None, budget: int | None, manager: JobManager | None
) -> Certificate:
    master = RestrictedMaster(box, symmetric=symmetric)
    try:
        strategies = all_columns(box, symmetric=master.symmetric, budget=budget)
    except BudgetExceededError as e:
        raise BudgetExceededError(f"{e} Use mode='colgen' for this box.") from e
    master.add(strategies)
    solution = master.solve()
    dual = master.expanded_dual(solution)
    gap = price_strategies(dual, box.shape, top_k=0, manager=manager).best_reduced_cost
    return master.certificate(solution, gap, rounds=1)


def local_part(
    box: Box,
    mode: SolveMode = "colgen",
    *,
    symmetric: bool | None = None,
    manager: JobManager | None = None,
    budget: int | None = None,
    max_rounds: int = 200,
    on_round: RoundCallbackType = None,
) -> LocalPart:
    """Largest local weight in a decomposition of ``box``, as a fraction of its mass.

    Args:
        box:
            A box of ``n`` binary boxes with rational entries; substitute the noise
            parameter with :meth:`~prbox.boxes.Box.evaluate` first.
        mode:
            ``"full"`` solves over every strategy pair and respects ``budget``;
            ``"colgen"`` generates strategy columns by exact pricing.
        symmetric:
            Whether to use the loss-pattern master. ``None`` picks it whenever the box
            allows it, in both modes, so ``"full"`` then keeps one column per loss
            histogram. Pass ``False`` for the unreduced master over every strategy pair.
        manager:
            Optional job manager for pricing.
        budget:
            Largest number of strategy pairs ``"full"`` may enumerate.
        max_rounds:
            Cap on column generation rounds.
        on_round:
            Optional column generation progress callback.
    """
    if box.symbolic:
        raise InvalidInputError("local_part needs rational entries; evaluate the box first.")
    mass = Fraction(box.mass)  # type: ignore[arg-type]
    if mass <= 0:
        raise InvalidInputError(f"Box mass must be positive, got {mass}.")
    if mode == "full":
        certificate = _solve_full(box, symmetric, budget, manager)
    elif mode == "colgen":
        certificate = column_generation(
            box, symmetric=symmetric, manager=manager, max_rounds=max_rounds, on_round=on_round
        )
    else:
        raise InvalidInputError(f"Unknown solve mode {mode!r}.")

    fraction = certificate.objective / mass
    if certificate.certified:
        _logger.info(f"Local part of {box.name or 'box'} is {fraction} ({certificate.summary()}).")
    else:
        _logger.warning(
            f"Local part of {box.name or 'box'} is only bracketed: "
            f"{fraction} <= value <= {(certificate.upper_bound or mass) / mass}."
        )
    return LocalPart(fraction, certificate)


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidInputError(f"Bounds are defined for n >= 1, got {n}.")


def upper_bound_isotropic(n: int, eps: Scalar | int) -> Scalar:
    """Total mass of the cells losing at least half the rounds, summed over input pairs.

    A strategy of positive weight loses at least ``ceil(n / 2)`` rounds at some input, so
    its weight is capped by such a cell; summing over all of them bounds the local part.
    """
    _check_n(n)
    eps = as_scalar(eps)
    total: Scalar = Fraction(0)
    for i in range((n + 1) // 2, n + 1):
        total = total + math.comb(n, i) * (1 - eps) ** (n - i) * eps**i
    return 4**n * total


def lower_bound_isotropic(n: int, eps: Scalar | int) -> Scalar:
    """Weight reached by strategies that lose exactly ``ceil(n / 2)`` rounds at worst.

    Valid for small enough ``eps`` only; sweeps record where the certified value first
    drops below it.
    """
    _check_n(n)
    eps = as_scalar(eps)
    if n % 2 == 0:
        half = n // 2
        return 2**half * math.comb(n, half) * (1 - eps) ** half * eps**half
    return (
        2 ** ((n + 3) // 2)
        * math.comb(n, (n + 1) // 2)
        * (1 - eps) ** ((n - 1) // 2)
        * eps ** ((n + 1) // 2)
    )


def pairing_lower_bound(n: int, eps: Scalar | int) -> Scalar:
    """Local weight of decomposing the boxes two by two, ``(4 eps) ** ceil(n / 2)``."""
    _check_n(n)
    return (4 * as_scalar(eps)) ** ((n + 1) // 2)


def biased_local_part(n: int, delta: Scalar | int) -> Scalar:
    """Exact local part ``(3 delta) ** n`` of ``n`` maximally biased boxes."""
    _check_n(n)
    return (3 * as_scalar(delta)) ** n


class LoseAllCells(NamedTuple):
    mass: Scalar
    nonzero_cells: int


def lose_all_cells(box: Box) -> LoseAllCells:
    """Mass on the cells losing every round, and how many of them are nonzero.

    Each strategy covers one such cell, so for any box the local part is at most this
    mass once every positive-weight strategy must lose all rounds somewhere.
    """
    n = box.n
    masks = np.broadcast_to(loss_masks(n), box.shape)
    entries = box.table[masks == (1 << n) - 1]
    total = sum(entries, Fraction(0))
    nonzero = sum(1 for e in entries if e != 0)
    return LoseAllCells(total, nonzero)
