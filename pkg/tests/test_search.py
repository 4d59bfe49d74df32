import pytest

from prbox.exceptions import InvalidInputError
from prbox.search import adversarial_search
from prbox.strategies import biased_feasible
from prbox.strategies import worst_input


@pytest.mark.parametrize("n", [1, 2, 3])
def test_search_finds_no_counterexample(n: int) -> None:
    report = adversarial_search(n, n_trials=40, seed=5)
    assert report.passed
    assert report.best_value == worst_input(report.best_strategy)[2]
    assert report.bound == (n + 1) // 2


def test_search_is_seeded() -> None:
    first = adversarial_search(2, n_trials=30, seed=1)
    second = adversarial_search(2, n_trials=30, seed=1)
    assert first == second


def test_biased_search() -> None:
    report = adversarial_search(2, target="biased", n_trials=60, seed=2)
    assert report.passed
    assert report.bound == 2
    if report.best_value <= 2:
        assert biased_feasible(report.best_strategy)


@pytest.mark.parametrize("n,target", [(0, "round_loss"), (7, "round_loss"), (2, "other")])
def test_search_rejects_arguments(n: int, target: str) -> None:
    with pytest.raises(InvalidInputError):
        adversarial_search(n, target=target, n_trials=1)  # type: ignore[arg-type]
