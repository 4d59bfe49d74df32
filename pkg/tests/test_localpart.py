from collections.abc import Callable
from collections.abc import Generator
from contextlib import contextmanager
from fractions import Fraction
import logging

from dask.distributed import Client
import pytest

import prbox
from prbox.boxes import EPS
from prbox.boxes import Box
from prbox.boxes import make_biased
from prbox.boxes import make_isotropic
from prbox.boxes import tensor
from prbox.exceptions import BudgetExceededError
from prbox.exceptions import InvalidInputError
from prbox.localpart import biased_local_part
from prbox.localpart import local_part
from prbox.localpart import lose_all_cells
from prbox.localpart import lower_bound_isotropic
from prbox.localpart import pairing_lower_bound
from prbox.localpart import upper_bound_isotropic
from prbox.lp import LPProblem
from prbox.lp import column_generation
from prbox.lp import verify
from prbox.lp.base import cell_row
from prbox.managers import DistributedJobManager
from prbox.numeric import poly_equal
from prbox.strategies import enumerate_strategies


@contextmanager
def _forced_log_propagation(logger_name: str) -> Generator[None, None, None]:
    try:
        # Local fix for https://github.com/pytest-dev/pytest/issues/3697
        logging.getLogger(logger_name).propagate = True
        yield
    finally:
        logging.getLogger(logger_name).propagate = False


@pytest.mark.parametrize("eps", [Fraction(k, 64) for k in (0, 1, 5, 8, 13, 16)])
@pytest.mark.parametrize("mode", ["full", "colgen"])
def test_single_isotropic_box(eps: Fraction, mode: str) -> None:
    fraction, certificate = local_part(make_isotropic(1, eps), mode)  # type: ignore[arg-type]
    assert fraction == 4 * eps
    assert certificate.certified


@pytest.mark.parametrize("eps", [Fraction(1, 64), Fraction(1, 8), Fraction(3, 16)])
def test_two_isotropic_boxes(eps: Fraction) -> None:
    fraction, certificate = local_part(make_isotropic(2, eps))
    assert fraction == 4 * eps
    assert verify(certificate, LPProblem.local_part(make_isotropic(2, eps)))


def test_two_isotropic_boxes_full_enumeration(isotropic_two: Box) -> None:
    fraction, certificate = local_part(isotropic_two, "full")
    assert fraction == Fraction(1, 2)
    assert certificate.rounds == 1


def test_modes_agree_without_symmetry(isotropic_two: Box) -> None:
    full = local_part(isotropic_two, "full", symmetric=False)
    colgen = local_part(isotropic_two, "colgen", symmetric=False)
    assert full.fraction == colgen.fraction == Fraction(1, 2)
    assert verify(colgen.certificate, LPProblem.local_part(isotropic_two))


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize(
    "delta", [Fraction(1, 20), Fraction(1, 10), Fraction(1, 5), Fraction(3, 10), Fraction(1, 3)]
)
def test_biased_boxes(n: int, delta: Fraction) -> None:
    fraction, certificate = local_part(make_biased(n, delta))
    assert fraction == (3 * delta) ** n
    assert fraction == biased_local_part(n, delta)
    assert verify(certificate, LPProblem.local_part(make_biased(n, delta)))


@pytest.mark.parametrize("seed", range(6))
def test_local_part_matches_brute_force_duality(
    seed: int, random_box: Callable[[int], Box]
) -> None:
    box = random_box(seed)
    fraction, certificate = local_part(box)
    strategies = list(enumerate_strategies(1))
    assert len(strategies) == 16

    used = {cell: Fraction(0) for cell in box.cells()}
    for strategy, weight in certificate.primal.items():
        assert weight >= 0
        for u, x in enumerate(strategy.f):  # type: ignore[attr-defined]
            for v, y in enumerate(strategy.g):  # type: ignore[attr-defined]
                used[x, y, u, v] += weight
    assert all(used[cell] <= box[cell] for cell in box.cells())
    assert sum(certificate.primal.values()) == fraction

    dual = certificate.dual
    assert all(y >= 0 for y in dual)
    for strategy in strategies:
        covered = sum(
            dual[cell_row(box.shape, x, y, u, v)]
            for u, x in enumerate(strategy.f)  # type: ignore[union-attr]
            for v, y in enumerate(strategy.g)  # type: ignore[union-attr]
        )
        assert covered >= 1
    assert sum(y * b for y, b in zip(dual, box.table.flat)) == fraction
    assert local_part(box, "full", symmetric=False).fraction == fraction


@pytest.mark.parametrize("seed", range(3))
def test_local_part_is_superadditive(seed: int, random_box: Callable[[int], Box]) -> None:
    a, b = random_box(2 * seed), random_box(2 * seed + 1)
    joint = local_part(tensor(a, b)).fraction
    assert joint >= local_part(a).fraction * local_part(b).fraction


def test_local_part_on_dask(client: Client, isotropic_two: Box) -> None:
    fraction, _ = local_part(isotropic_two, manager=DistributedJobManager(client))
    assert fraction == Fraction(1, 2)


def test_absolute_local_part(isotropic_one: Box) -> None:
    result = local_part(isotropic_one)
    assert result.absolute == result.certificate.objective == Fraction(1, 2)


def test_symbolic_box_rejected() -> None:
    with pytest.raises(InvalidInputError):
        local_part(make_isotropic(1, EPS))


def test_unknown_mode(isotropic_one: Box) -> None:
    with pytest.raises(InvalidInputError):
        local_part(isotropic_one, "simplex")  # type: ignore[arg-type]


def test_full_mode_budget(isotropic_two: Box) -> None:
    with pytest.raises(BudgetExceededError):
        local_part(isotropic_two, "full", budget=1000)


def test_round_callback(isotropic_two: Box) -> None:
    rounds: list[int] = []
    local_part(isotropic_two, on_round=lambda i, objective, gap: rounds.append(i))
    assert rounds and rounds == list(range(1, len(rounds) + 1))


def test_stopped_column_generation_is_not_certified(
    isotropic_two: Box, caplog: pytest.LogCaptureFixture
) -> None:
    with _forced_log_propagation(logger_name=prbox.__name__):
        certificate = column_generation(isotropic_two, symmetric=False, max_rounds=1, batch=1)
    assert not certificate.certified
    assert certificate.objective < Fraction(1, 2)
    assert any(r.levelno == logging.WARNING for r in caplog.records)
    assert not verify(certificate, LPProblem.local_part(isotropic_two))


def test_mutated_certificate_rejected(isotropic_two: Box) -> None:
    _, certificate = local_part(isotropic_two)
    strategy, weight = next(iter(certificate.primal.items()))
    mutated = certificate.with_primal_weight(strategy, weight + Fraction(1, 1000))
    check = verify(mutated, LPProblem.local_part(isotropic_two))
    assert not check
    assert check.message


def test_certificate_with_wrong_dual_rejected(isotropic_one: Box) -> None:
    _, certificate = local_part(isotropic_one)
    tampered = type(certificate)(
        certificate.objective,
        certificate.primal,
        tuple(Fraction(0) for _ in certificate.dual),
        certificate.slack,
        None,
    )
    assert not verify(tampered, LPProblem.local_part(isotropic_one))


def test_isotropic_bounds() -> None:
    assert poly_equal(upper_bound_isotropic(1, EPS), 4 * EPS)
    assert poly_equal(lower_bound_isotropic(1, EPS), 4 * EPS)
    assert poly_equal(lower_bound_isotropic(2, EPS), 4 * EPS * (1 - EPS))
    assert poly_equal(lower_bound_isotropic(3, EPS), 24 * (1 - EPS) * EPS**2)
    assert poly_equal(upper_bound_isotropic(2, EPS), 16 * (2 * EPS * (1 - EPS) + EPS**2))
    assert poly_equal(pairing_lower_bound(3, EPS), 16 * EPS**2)
    assert pairing_lower_bound(2, Fraction(1, 8)) == Fraction(1, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_bounds_are_ordered(n: int) -> None:
    eps = Fraction(1, 64)
    assert pairing_lower_bound(n, eps) <= upper_bound_isotropic(n, eps)  # type: ignore
    assert lower_bound_isotropic(n, eps) <= upper_bound_isotropic(n, eps)  # type: ignore


def test_bounds_need_positive_n() -> None:
    with pytest.raises(InvalidInputError):
        upper_bound_isotropic(0, Fraction(1, 8))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lose_all_cells(n: int) -> None:
    delta = Fraction(1, 10)
    cells = lose_all_cells(make_biased(n, delta))
    assert cells.mass == (3 * delta) ** n
    assert cells.nonzero_cells == 3**n


@pytest.mark.slow
def test_three_biased_boxes() -> None:
    fraction, certificate = local_part(make_biased(3, Fraction(1, 10)))
    assert fraction == Fraction(27, 1000)
    assert verify(certificate, LPProblem.local_part(make_biased(3, Fraction(1, 10))))
