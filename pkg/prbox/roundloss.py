"""Exhaustive and sampled checks of how many CHSH rounds local strategies lose.

Two claims are checked here. Every local deterministic strategy for ``n`` boxes loses at
least ``ceil(n / 2)`` rounds at its worst input pair. Against maximally biased boxes, every
strategy of positive weight loses all ``n`` rounds at some input pair.

XOR-ing both parties' outputs with the same mask leaves every loss pattern unchanged, so
for exact checks Alice's answer to input 0 can be fixed to 0.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
import itertools
import logging
from typing import Literal
from typing import Optional

import numpy as np

from prbox.boxes import make_biased
from prbox.boxes import popcount
from prbox.exceptions import InvalidInputError
from prbox.managers import JobManager
from prbox.managers import LocalJobManager
from prbox.strategies import LocalDetStrategy


_logger = logging.getLogger(__name__)

CheckMethod = Literal["exhaustive", "quotient", "sampled"]

# Upper bound on array elements materialised by one vectorised step.
_BLOCK_ELEMENTS = 1 << 22
_SAMPLE_JOBS = 16

_Found = Optional[tuple[list[int], list[int]]]


def round_threshold(n: int) -> int:
    """Fewest rounds a strategy must lose at its worst input, ``ceil(n / 2)``."""
    return (n + 1) // 2


@dataclass(frozen=True)
class RoundLossReport:
    """Outcome of a worst-case round-loss check.

    Args:
        n:
            Number of boxes.
        method:
            ``"exhaustive"``, ``"quotient"`` or ``"sampled"``.
        checked:
            Strategies (or quotient classes) inspected.
        minimum_worst:
            Smallest worst-case loss count met among them.
        counterexample:
            First strategy losing fewer than ``threshold`` rounds everywhere.
        witness:
            A strategy whose worst case is exactly ``threshold``, when one was met.
        seed:
            Seed of a sampled check.
    """

    n: int
    method: CheckMethod
    checked: int
    minimum_worst: int
    counterexample: LocalDetStrategy | None = None
    witness: LocalDetStrategy | None = None
    seed: int | None = None

    @property
    def threshold(self) -> int:
        return round_threshold(self.n)

    @property
    def passed(self) -> bool:
        return self.counterexample is None


@dataclass(frozen=True)
class BiasedLossReport:
    """Outcome of the lose-all-rounds check for positive-weight strategies on biased boxes.

    Args:
        n:
            Number of boxes.
        method:
            ``"exhaustive"`` or ``"sampled"``.
        checked:
            Positive-weight strategies inspected.
        counterexample:
            A positive-weight strategy that never loses all rounds.
        mismatch:
            A strategy where the structural weight conditions and the box's zero
            cells disagree; exhaustive checks only.
    """

    n: int
    method: CheckMethod
    checked: int
    counterexample: LocalDetStrategy | None = None
    mismatch: LocalDetStrategy | None = None
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None and self.mismatch is None


def _all_tables(n: int) -> np.ndarray:
    """Every response table for ``n`` binary boxes, in canonical encoding order."""
    size = 1 << n
    index = np.arange(size**size, dtype=np.int64)
    powers = size ** np.arange(size - 1, -1, -1, dtype=np.int64)
    return (index[:, None] // powers[None, :]) % size


def _and_table(size: int) -> np.ndarray:
    inputs = np.arange(size, dtype=np.int64)
    return inputs[:, None] & inputs[None, :]


def _strategy(f: Sequence[int], g: Sequence[int]) -> LocalDetStrategy:
    return LocalDetStrategy.binary([int(x) for x in f], [int(y) for y in g])


def _worst(f: np.ndarray, g: np.ndarray, and_uv: np.ndarray) -> np.ndarray:
    """Worst-case loss counts of strategy rows ``f[..., u]`` and ``g[..., v]``."""
    masks = f[..., :, None] ^ g[..., None, :] ^ and_uv
    return popcount(masks).max(axis=(-2, -1))


def _check_small(n: int) -> None:
    if n < 1:
        raise InvalidInputError(f"Need n >= 1, got {n}.")


def exhaustive_round_loss(n: int) -> RoundLossReport:
    """Worst-case loss of every strategy pair, for ``n <= 2``."""
    _check_small(n)
    if n > 2:
        raise InvalidInputError("Exhaustive enumeration is limited to n <= 2.")
    size = 1 << n
    tables = _all_tables(n)
    worst = _worst(tables[:, None, :], tables[None, :, :], _and_table(size))
    threshold = round_threshold(n)

    counterexample = witness = None
    bad = np.argwhere(worst < threshold)
    if len(bad):
        counterexample = _strategy(tables[bad[0][0]], tables[bad[0][1]])
    exact = np.argwhere(worst == threshold)
    if len(exact):
        witness = _strategy(tables[exact[0][0]], tables[exact[0][1]])
    _logger.info(
        f"Checked all {worst.size} strategies for n={n}: worst-case loss at least "
        f"{int(worst.min())}, {len(exact)} strategies lose exactly {threshold}."
    )
    return RoundLossReport(
        n, "exhaustive", int(worst.size), int(worst.min()), counterexample, witness
    )


def _light_bob_tables(n: int, light: np.ndarray) -> np.ndarray:
    size = 1 << n
    choices = np.array(list(itertools.product(range(len(light)), repeat=size)), dtype=np.int64)
    return light[choices]


def _quotient_block(g: np.ndarray, and_uv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Best worst-case loss per Bob table, with Alice answering each input optimally.

    Returns the per-table value and Alice's best answers. Alice's answer to input 0 is 0.
    """
    size = and_uv.shape[0]
    x = np.arange(size, dtype=np.int64)
    # losses[c, u, x, v]
    losses = popcount(x[None, None, :, None] ^ g[:, None, None, :] ^ and_uv[None, :, None, :])
    per_answer = losses.max(axis=3)
    per_answer[:, 0, 1:] = size
    answers = per_answer.argmin(axis=2)
    return per_answer.min(axis=2).max(axis=1), answers


def quotient_round_loss(n: int) -> RoundLossReport:
    """Exact worst-case loss check over the output-flip quotient, for ``n <= 3``.

    With Alice's answer to input 0 fixed to 0, a strategy losing fewer than ``ceil(n/2)``
    rounds everywhere needs every Bob output to differ from 0 in fewer than that many
    bits. Alice's answers to the other inputs are then independent, so each such Bob table
    is settled by one minimum per Alice input.
    """
    _check_small(n)
    if n > 3:
        raise InvalidInputError("The quotient check is limited to n <= 3.")
    size = 1 << n
    threshold = round_threshold(n)
    values = np.arange(size, dtype=np.int64)
    light = values[popcount(values) < threshold]
    tables = _light_bob_tables(n, light)
    and_uv = _and_table(size)

    step = max(1, _BLOCK_ELEMENTS // size**3)
    minimum = size
    counterexample = None
    for start in range(0, len(tables), step):
        block = tables[start : start + step]
        value, answers = _quotient_block(block, and_uv)
        minimum = min(minimum, int(value.min()))
        failing = np.flatnonzero(value < threshold)
        if counterexample is None and len(failing):
            row = int(failing[0])
            counterexample = _strategy(answers[row], block[row])
    _logger.info(
        f"Quotient check for n={n}: {len(tables)} Bob tables with low-weight outputs, "
        f"best worst-case loss {minimum}."
    )
    return RoundLossReport(n, "quotient", len(tables), minimum, counterexample)


def _sample_round_chunk(job: tuple[int, int, int]) -> tuple[int, _Found]:
    n, count, seed = job
    size = 1 << n
    rng = np.random.default_rng(seed)
    and_uv = _and_table(size)
    step = max(1, _BLOCK_ELEMENTS // (size * size))
    minimum = n
    counterexample = None
    done = 0
    while done < count:
        m = min(step, count - done)
        f = rng.integers(0, size, size=(m, size))
        g = rng.integers(0, size, size=(m, size))
        worst = _worst(f, g, and_uv)
        minimum = min(minimum, int(worst.min()))
        failing = np.flatnonzero(worst < round_threshold(n))
        if counterexample is None and len(failing):
            row = int(failing[0])
            counterexample = (f[row].tolist(), g[row].tolist())
        done += m
    return minimum, counterexample


def _spawn_seeds(seed: int, jobs: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(jobs)]


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def sample_round_loss(
    n: int, samples: int, seed: int, *, manager: JobManager | None = None
) -> RoundLossReport:
    """Worst-case loss of uniformly drawn strategies.

    The draws are split into a fixed number of jobs with seeds spawned from ``seed``, so the
    outcome does not depend on how many workers ``manager`` runs.
    """
    _check_small(n)
    if n > 8:
        raise InvalidInputError("Sampling is limited to n <= 8.")
    if samples <= 0:
        raise InvalidInputError(f"Need a positive sample count, got {samples}.")
    runner = manager or LocalJobManager(1)
    jobs = [
        (n, count, job_seed)
        for count, job_seed in zip(_split(samples, _SAMPLE_JOBS), _spawn_seeds(seed, _SAMPLE_JOBS))
        if count
    ]
    results = runner.map(_sample_round_chunk, jobs)
    minimum = min(r[0] for r in results)
    found = next((r[1] for r in results if r[1] is not None), None)
    counterexample = None if found is None else _strategy(*found)
    _logger.info(
        f"Sampled {samples} strategies for n={n} (seed {seed}): "
        f"worst-case loss at least {minimum}."
    )
    return RoundLossReport(n, "sampled", samples, minimum, counterexample, seed=seed)


def round_loss(
    n: int, *, samples: int = 10**6, seed: int = 20100, manager: JobManager | None = None
) -> list[RoundLossReport]:
    """The strongest available checks for ``n``: exact where feasible, sampled beyond."""
    reports = []
    if n <= 2:
        reports.append(exhaustive_round_loss(n))
    if n == 3:
        reports.append(quotient_round_loss(n))
    if n >= 3:
        reports.append(sample_round_loss(n, samples, seed, manager=manager))
    return reports


def _biased_bad(x: np.ndarray, y: np.ndarray, both: np.ndarray, full: int) -> np.ndarray:
    """Rounds where the outputs sit on a zero cell of the maximally biased box."""
    return ((both & ~(x ^ y)) | (~both & x & ~y)) & full


def _zero_cells(n: int) -> np.ndarray:
    table = make_biased(n, Fraction(1, 10)).table
    return np.array(table == 0, dtype=bool)


def exhaustive_biased_loss(n: int) -> BiasedLossReport:
    """Every strategy pair against the maximally biased boxes, for ``n <= 2``.

    Positive weight is read off the zero cells of the box and compared with the bitwise
    conditions; every positive-weight strategy must lose all rounds at some input pair.
    """
    _check_small(n)
    if n > 2:
        raise InvalidInputError("Exhaustive enumeration is limited to n <= 2.")
    size = 1 << n
    tables = _all_tables(n)
    both = _and_table(size)
    x = tables[:, None, :, None]
    y = tables[None, :, None, :]

    feasible = (_biased_bad(x, y, both, size - 1) == 0).all(axis=(2, 3))
    inputs = np.arange(size)
    hits = _zero_cells(n)[x, y, inputs[:, None], inputs[None, :]]
    positive = ~hits.any(axis=(2, 3))
    worst = popcount(x ^ y ^ both).max(axis=(2, 3))

    mismatch = counterexample = None
    disagree = np.argwhere(positive != feasible)
    if len(disagree):
        mismatch = _strategy(tables[disagree[0][0]], tables[disagree[0][1]])
    failing = np.argwhere(positive & (worst < n))
    if len(failing):
        counterexample = _strategy(tables[failing[0][0]], tables[failing[0][1]])
    _logger.info(
        f"Checked all {positive.size} strategies against {n} biased boxes: "
        f"{int(positive.sum())} have positive weight."
    )
    return BiasedLossReport(n, "exhaustive", int(positive.sum()), counterexample, mismatch)


def _feasible_sample(
    rng: np.random.Generator, n: int, m: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draws Alice tables obeying the input-(1, 1) condition and admissible Bob answers.

    Alice's bit ``i`` is constant on the inputs with bit ``i`` set; Bob answers each input
    uniformly among the outputs keeping positive weight. Returns ``(f, g, valid)``.
    """
    size = 1 << n
    full = size - 1
    inputs = np.arange(size, dtype=np.int64)
    base = rng.integers(0, size, size=(m, size))
    constant = rng.integers(0, size, size=(m, 1))
    f = (base & ~inputs & full) | (constant & inputs)

    both = (inputs[:, None] & inputs[None, :])[None, :, None, :]
    # bad[m, v, y, u]
    bad = _biased_bad(f[:, None, None, :], inputs[None, None, :, None], both, full)
    admissible = (bad == 0).all(axis=3)
    keys = rng.random(admissible.shape)
    keys[~admissible] = -1.0
    g = keys.argmax(axis=2)
    valid = admissible.any(axis=2).all(axis=1)
    return f, g, valid


def _sample_biased_chunk(job: tuple[int, int, int]) -> tuple[int, _Found]:
    n, count, seed = job
    size = 1 << n
    rng = np.random.default_rng(seed)
    and_uv = _and_table(size)
    step = max(1, _BLOCK_ELEMENTS // size**3)
    checked = 0
    counterexample = None
    while checked < count:
        f, g, valid = _feasible_sample(rng, n, step)
        f, g = f[valid][: count - checked], g[valid][: count - checked]
        worst = _worst(f, g, and_uv)
        failing = np.flatnonzero(worst < n)
        if counterexample is None and len(failing):
            row = int(failing[0])
            counterexample = (f[row].tolist(), g[row].tolist())
        checked += len(f)
    return checked, counterexample


def sample_biased_loss(
    n: int, samples: int, seed: int, *, manager: JobManager | None = None
) -> BiasedLossReport:
    """Positive-weight strategies drawn at random must lose all rounds somewhere."""
    _check_small(n)
    if n > 5:
        raise InvalidInputError("Sampling is limited to n <= 5.")
    if samples <= 0:
        raise InvalidInputError(f"Need a positive sample count, got {samples}.")
    runner = manager or LocalJobManager(1)
    jobs = [
        (n, count, job_seed)
        for count, job_seed in zip(_split(samples, _SAMPLE_JOBS), _spawn_seeds(seed, _SAMPLE_JOBS))
        if count
    ]
    results = runner.map(_sample_biased_chunk, jobs)
    found = next((r[1] for r in results if r[1] is not None), None)
    counterexample = None if found is None else _strategy(*found)
    checked = sum(r[0] for r in results)
    _logger.info(f"Sampled {checked} positive-weight strategies for {n} biased boxes.")
    return BiasedLossReport(n, "sampled", checked, counterexample, seed=seed)
