from collections.abc import Callable
from fractions import Fraction
import itertools

import pytest

from prbox.boxes import EPS
from prbox.boxes import Box
from prbox.boxes import make_biased
from prbox.boxes import make_deterministic
from prbox.boxes import make_isotropic
from prbox.boxes import subtract_component
from prbox.exceptions import BudgetExceededError
from prbox.exceptions import ComponentError
from prbox.exceptions import InvalidInputError
from prbox.strategies import DepolElement
from prbox.strategies import LocalDetStrategy
from prbox.strategies import apply_depol
from prbox.strategies import biased_feasible
from prbox.strategies import decode_side
from prbox.strategies import depolarization_images
from prbox.strategies import depolarize
from prbox.strategies import encode_side
from prbox.strategies import enumerate_strategies
from prbox.strategies import group
from prbox.strategies import is_product
from prbox.strategies import loss_histogram
from prbox.strategies import max_weight
from prbox.strategies import orbit
from prbox.strategies import product
from prbox.strategies import rounds_lost
from prbox.strategies import strategy_count
from prbox.strategies import worst_input


def test_parse_and_format() -> None:
    strategy = LocalDetStrategy.parse("[0 0 0 1; 0 0 2 0]")
    assert strategy.f == (0, 0, 0, 1)
    assert strategy.g == (0, 0, 2, 0)
    assert strategy.n == 2
    assert str(strategy) == "[0 0 0 1; 0 0 2 0]"


@pytest.mark.parametrize("text", ["0 0; 0 0", "[0 0 0; 0 0 0]", "[0 2; 0 0]", "[a; b]"])
def test_parse_invalid(text: str) -> None:
    with pytest.raises(InvalidInputError):
        LocalDetStrategy.parse(text)


def test_side_encoding() -> None:
    assert encode_side((1, 0, 3, 2), 4) == 1 * 64 + 3 * 4 + 2
    assert decode_side(encode_side((1, 0, 3, 2), 4), 4, 4) == (1, 0, 3, 2)


@pytest.mark.parametrize("n,expected", [(1, 16), (2, 65536)])
def test_enumeration_counts(n: int, expected: int) -> None:
    strategies = enumerate_strategies(n)
    assert len(strategies) == expected == strategy_count(n)
    assert len(set(strategies.clone())) == expected


def test_enumeration_partition_covers_range() -> None:
    iterator = enumerate_strategies(2, "bob")
    parts = iterator.partition(3)
    assert sum(len(p) for p in parts) == 256
    assert [t for p in parts for t in p] == list(enumerate_strategies(2, "bob"))


def test_enumeration_budget() -> None:
    with pytest.raises(BudgetExceededError):
        enumerate_strategies(3, budget=10**8)
    assert len(enumerate_strategies(3, "alice")) == 8**8


def test_enumeration_invalid() -> None:
    with pytest.raises(InvalidInputError):
        enumerate_strategies(0)
    with pytest.raises(InvalidInputError):
        enumerate_strategies(1, "carol")  # type: ignore[arg-type]


def test_product_strategy() -> None:
    first = LocalDetStrategy.parse("[0 1; 1 1]")
    second = LocalDetStrategy.parse("[1 0; 0 0]")
    combined = product(first, second)
    assert combined.f == (1, 0, 3, 2)
    assert combined.g == (2, 2, 2, 2)
    assert is_product(combined, 1)
    assert not is_product(LocalDetStrategy.parse("[0 0 0 1; 0 0 2 0]"), 1)
    with pytest.raises(InvalidInputError):
        is_product(combined, 2)


def test_group_order() -> None:
    assert len(list(group(1))) == 8
    assert len(list(group(2))) == 64


def test_composition_matches_sequential_action() -> None:
    strategy = LocalDetStrategy.parse("[0 1 3 2; 2 0 1 1]")
    elements = list(group(2))
    for first, then in itertools.product(elements[::7], elements[::5]):
        sequential = apply_depol(then, apply_depol(first, strategy))
        assert apply_depol(first.compose(then), strategy) == sequential


@pytest.mark.parametrize("element", list(group(1)))
def test_group_acts_consistently_on_boxes(element: DepolElement) -> None:
    strategy = LocalDetStrategy.parse("[0 1; 1 0]")
    relabeled = apply_depol(element, make_deterministic(strategy))
    assert relabeled == make_deterministic(apply_depol(element, strategy))


def test_group_fixes_isotropic_boxes() -> None:
    box = make_isotropic(2, Fraction(1, 8))
    assert all(apply_depol(e, box) == box for e in group(2))
    symbolic = make_isotropic(1, EPS)
    assert all(apply_depol(e, symbolic) == symbolic for e in group(1))


def test_depolarize_biased_box_gives_isotropic() -> None:
    # The biased box wins with probability 1 - delta on average over inputs.
    delta = Fraction(1, 10)
    assert depolarize(make_biased(1, delta)) == make_isotropic(1, 3 * delta / 4)


def test_orbit_sizes() -> None:
    base = LocalDetStrategy.parse("[0 0; 0 0]")
    assert len(depolarization_images(base)) == 8
    assert len(orbit(base)) == 8
    point = LocalDetStrategy.parse("[0 0 0 1; 0 0 2 0]")
    assert len(depolarization_images(point)) == 64
    assert len(orbit(point)) == 32


def test_loss_statistics_are_invariant() -> None:
    strategy = LocalDetStrategy.parse("[0 0 0 1; 0 0 2 0]")
    histogram = loss_histogram(strategy)
    assert sum(histogram) == 16
    assert all(loss_histogram(image) == histogram for image in orbit(strategy))


def test_rounds_lost() -> None:
    strategy = LocalDetStrategy.parse("[0 0; 0 0]")
    assert rounds_lost(strategy, 1, 1) == 1
    assert rounds_lost(strategy, 0, 1) == 0
    assert worst_input(strategy) == (1, 1, 1)
    assert loss_histogram(strategy) == (3, 1)


def test_max_weight(isotropic_one: Box) -> None:
    strategy = LocalDetStrategy.parse("[0 0; 0 0]")
    assert max_weight(strategy, isotropic_one) == Fraction(1, 16)
    assert max_weight(strategy, make_isotropic(1, EPS)) == EPS / 2
    assert max_weight(strategy, make_isotropic(1, EPS), probe=Fraction(3, 4)) == (1 - EPS) / 2
    with pytest.raises(InvalidInputError):
        max_weight(LocalDetStrategy.parse("[0 0 0 0; 0 0 0 0]"), isotropic_one)


def test_biased_feasible_count() -> None:
    feasible = [s for s in enumerate_strategies(1) if biased_feasible(s)]  # type: ignore
    assert len(feasible) == 4
    box = make_biased(1, Fraction(1, 10))
    assert all(max_weight(s, box) > 0 for s in feasible)


@pytest.mark.parametrize("element", list(group(1)))
def test_cell_map_matches_box_relabeling(element: DepolElement) -> None:
    box = make_biased(1, Fraction(1, 10))
    relabeled = apply_depol(element, box)
    assert all(relabeled[element.apply_cell(*cell)] == box[cell] for cell in box.cells())


@pytest.mark.parametrize("seed", range(4))
def test_max_weight_is_the_largest_removable_weight(
    seed: int, random_box: Callable[[int], Box]
) -> None:
    box = random_box(seed)
    for strategy in enumerate_strategies(1):
        weight = max_weight(strategy, box)  # type: ignore[arg-type]
        part = make_deterministic(strategy)  # type: ignore[arg-type]
        remainder = subtract_component(box, weight, part)
        assert min(remainder[cell] for cell in remainder.cells()) >= 0
        f, g = strategy.f, strategy.g  # type: ignore[union-attr]
        assert any(remainder[f[u], g[v], u, v] == 0 for u in (0, 1) for v in (0, 1))
        with pytest.raises(ComponentError):
            subtract_component(box, weight + Fraction(1, 1000), part)
