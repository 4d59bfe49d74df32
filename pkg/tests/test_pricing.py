from fractions import Fraction
import random

from dask.distributed import Client
import pytest

from prbox.lp import price_strategies
from prbox.lp.base import cell_row
from prbox.managers import DistributedJobManager
from prbox.managers import LocalJobManager
from prbox.strategies import LocalDetStrategy
from prbox.strategies import enumerate_strategies


def _random_dual(n: int, seed: int) -> list[Fraction]:
    rng = random.Random(seed)
    size = 1 << n
    return [Fraction(rng.randint(0, 12), rng.randint(1, 40)) for _ in range(size**4)]


def _reduced_cost(strategy: LocalDetStrategy, dual: list[Fraction], size: int) -> Fraction:
    shape = (size, size, size, size)
    used = sum(
        (
            dual[cell_row(shape, x, y, u, v)]
            for u, x in enumerate(strategy.f)
            for v, y in enumerate(strategy.g)
        ),
        Fraction(0),
    )
    return 1 - used


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pricing_matches_brute_force(n: int, seed: int) -> None:
    size = 1 << n
    dual = _random_dual(n, seed)
    result = price_strategies(dual, (size, size, size, size), top_k=5)
    brute = max(_reduced_cost(s, dual, size) for s in enumerate_strategies(n))  # type: ignore
    assert result.best_reduced_cost == brute
    assert _reduced_cost(result.best, dual, size) == brute
    for strategy, reduced in zip(result.columns, result.reduced_costs):
        assert reduced > 0
        assert _reduced_cost(strategy, dual, size) == reduced
    assert list(result.reduced_costs) == sorted(result.reduced_costs, reverse=True)


def test_zero_dual_prices_every_strategy_at_one() -> None:
    result = price_strategies([Fraction(0)] * 16, (2, 2, 2, 2), top_k=100)
    assert result.best_reduced_cost == 1
    # One column per Bob table, completed by Alice's best response.
    assert len(result.columns) == 4
    assert not result.optimal


def test_unit_dual_is_optimal() -> None:
    result = price_strategies([Fraction(1)] * 16, (2, 2, 2, 2))
    assert result.best_reduced_cost == -3
    assert result.optimal
    assert result.columns == ()


def test_pricing_on_local_workers() -> None:
    dual = _random_dual(2, 7)
    expected = price_strategies(dual, (4, 4, 4, 4), top_k=8)
    with LocalJobManager(n_jobs=2) as manager:
        parallel = price_strategies(dual, (4, 4, 4, 4), top_k=8, manager=manager)
    assert parallel == expected


def test_pricing_on_dask(client: Client) -> None:
    dual = _random_dual(2, 11)
    expected = price_strategies(dual, (4, 4, 4, 4), top_k=8)
    parallel = price_strategies(dual, (4, 4, 4, 4), top_k=8, manager=DistributedJobManager(client))
    assert parallel == expected
