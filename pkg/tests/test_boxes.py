from collections.abc import Callable
from fractions import Fraction
import logging
import random

import numpy as np
import pytest

from prbox.boxes import EPS
from prbox.boxes import Box
from prbox.boxes import chsh_profile
from prbox.boxes import is_nonsignalling
from prbox.boxes import is_normalized
from prbox.boxes import make_biased
from prbox.boxes import make_deterministic
from prbox.boxes import make_family
from prbox.boxes import make_isotropic
from prbox.boxes import make_perfect
from prbox.boxes import make_uniform
from prbox.boxes import mix
from prbox.boxes import negative_cell
from prbox.boxes import normalization_violation
from prbox.boxes import pattern_values
from prbox.boxes import rounds_lost_mass
from prbox.boxes import signalling_violation
from prbox.boxes import subtract_component
from prbox.boxes import tensor
from prbox.boxes import tensor_power
from prbox.boxes import unit_box
from prbox.exceptions import ComponentError
from prbox.exceptions import InvalidInputError
from prbox.exceptions import ParameterRangeError
from prbox.strategies import LocalDetStrategy


def test_single_isotropic_entries(isotropic_one: Box) -> None:
    for x, y, u, v in isotropic_one.cells():
        expected = Fraction(7, 16) if x ^ y == u & v else Fraction(1, 16)
        assert isotropic_one[x, y, u, v] == expected
    assert isotropic_one.mass == 1
    assert isotropic_one.n == 1


def test_two_isotropic_boxes(isotropic_two: Box) -> None:
    assert isotropic_two.shape == (4, 4, 4, 4)
    # Cell losing only the second round.
    assert isotropic_two[0, 1, 0, 0] == Fraction(7, 16) * Fraction(1, 16)
    assert isotropic_two[0, 0, 3, 3] == Fraction(1, 256)
    assert is_nonsignalling(isotropic_two)
    assert is_normalized(isotropic_two)


def test_symbolic_isotropic_box() -> None:
    box = make_isotropic(2, EPS)
    assert box.symbolic
    assert box.variable == "eps"
    assert box.domain == (Fraction(0), Fraction(1, 4))
    assert box.evaluate(Fraction(1, 8)) == make_isotropic(2, Fraction(1, 8))
    assert negative_cell(box) is None


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("delta", [Fraction(0), Fraction(1, 10), Fraction(1, 3)])
def test_biased_boxes_are_valid(n: int, delta: Fraction) -> None:
    box = make_biased(n, delta)
    assert signalling_violation(box) is None
    assert normalization_violation(box) is None
    assert negative_cell(box) is None


def test_biased_single_box_cells() -> None:
    box = make_biased(1, Fraction(1, 10))
    assert box[0, 1, 0, 0] == Fraction(1, 10)
    assert box[1, 0, 0, 1] == 0
    assert box[0, 1, 1, 1] == Fraction(11, 20)
    assert box[0, 0, 1, 1] == 0
    assert box[1, 1, 1, 1] == 0


def test_parameter_range_policy(caplog: pytest.LogCaptureFixture) -> None:
    with pytest.raises(ParameterRangeError):
        make_isotropic(1, Fraction(1, 2))
    logger = logging.getLogger("prbox")
    logger.propagate = True
    try:
        box = make_biased(1, Fraction(1, 2), force=True)
    finally:
        logger.propagate = False
    assert box.mass == 1
    assert any(r.levelno == logging.WARNING for r in caplog.records)
    with pytest.raises(ParameterRangeError):
        make_isotropic(1, 2, force=True)


def test_make_family() -> None:
    assert make_family("isotropic", 1, Fraction(1, 8)) == make_isotropic(1, Fraction(1, 8))
    assert make_family("biased", 1, Fraction(1, 8)) == make_biased(1, Fraction(1, 8))
    with pytest.raises(InvalidInputError):
        make_family("depolarized", 1, Fraction(1, 8))


def test_perfect_and_uniform() -> None:
    perfect = make_perfect(1)
    assert perfect[0, 0, 1, 1] == 0
    assert perfect[0, 1, 1, 1] == Fraction(1, 2)
    uniform = make_uniform(2)
    assert all(uniform[cell] == Fraction(1, 16) for cell in uniform.cells())


def test_tensor_unit_and_bit_order(isotropic_one: Box) -> None:
    assert tensor(unit_box(), isotropic_one) == isotropic_one
    lossy = tensor(make_perfect(1), isotropic_one)
    # The first box is the most significant bit and is perfect.
    assert lossy[3, 2, 2, 0] == Fraction(1, 2) * Fraction(1, 16)
    assert lossy[0, 2, 0, 0] == 0


def test_tensor_power_zero(isotropic_one: Box) -> None:
    assert tensor_power(isotropic_one, 0) == unit_box()
    with pytest.raises(InvalidInputError):
        tensor_power(isotropic_one, -1)


def test_signalling_box_detected() -> None:
    table = np.zeros((2, 2, 2, 2), dtype=object)
    for u in range(2):
        # Alice outputs Bob's input.
        for v in range(2):
            table[v, 0, u, v] = Fraction(1)
    violation = signalling_violation(Box(table))
    assert violation is not None
    assert "Alice" in violation


def test_normalization_violation_detected() -> None:
    table = np.full((2, 2, 2, 2), Fraction(1, 4), dtype=object)
    table[0, 0, 1, 1] = Fraction(1, 2)
    assert normalization_violation(Box(table)) is not None


def test_negative_cell_detected() -> None:
    table = np.full((2, 2, 2, 2), Fraction(1, 4), dtype=object)
    table[0, 0, 1, 1] = Fraction(-1, 4)
    table[1, 1, 1, 1] = Fraction(3, 4)
    assert negative_cell(Box(table)) == (0, 0, 1, 1)


def test_invalid_table_shape() -> None:
    with pytest.raises(InvalidInputError):
        Box([[Fraction(1)]])


def test_symbolic_box_needs_domain() -> None:
    with pytest.raises(InvalidInputError):
        Box(np.full((1, 1, 1, 1), EPS, dtype=object))


def test_mix_masses(isotropic_one: Box) -> None:
    total = mix([1, 2], [isotropic_one, make_perfect(1)])
    assert total.mass == 3
    assert total[0, 0, 0, 0] == Fraction(7, 16) + 1
    with pytest.raises(InvalidInputError):
        mix([1], [isotropic_one, isotropic_one])


def test_isotropic_decomposes_into_perfect_and_uniform() -> None:
    eps = Fraction(1, 8)
    mixed = mix([1 - 2 * eps, 2 * eps], [make_perfect(1), make_uniform(1)])
    assert mixed == make_isotropic(1, eps)


def test_subtract_component(isotropic_one: Box) -> None:
    strategy = make_deterministic(LocalDetStrategy.binary([0, 0], [0, 0]))
    rest = subtract_component(isotropic_one, Fraction(1, 16), strategy)
    assert rest.mass == 1
    assert rest[0, 0, 1, 1] == 0
    assert rest[0, 1, 1, 1] == Fraction(7, 16) * Fraction(16, 15)
    with pytest.raises(ComponentError) as e:
        subtract_component(isotropic_one, Fraction(1, 8), strategy)
    assert e.value.cell == (0, 0, 1, 1)


def test_subtract_symbolic_component_too_heavy() -> None:
    box = make_isotropic(1, EPS)
    strategy = make_deterministic(LocalDetStrategy.binary([0, 0], [0, 0]))
    with pytest.raises(ComponentError):
        subtract_component(box, EPS, strategy)


def test_chsh_profile(isotropic_one: Box) -> None:
    profile = chsh_profile(isotropic_one)
    assert set(profile.all_rounds.values()) == {Fraction(7, 8)}
    assert profile.per_round[(1, 1)] == (Fraction(7, 8),)


def test_rounds_lost_mass(isotropic_two: Box) -> None:
    eps = Fraction(1, 8)
    mass = rounds_lost_mass(isotropic_two)
    assert mass == {0: (1 - eps) ** 2, 1: 2 * eps * (1 - eps), 2: eps**2}


def test_pattern_values(isotropic_one: Box) -> None:
    assert pattern_values(isotropic_one) == {0: Fraction(7, 16), 1: Fraction(1, 16)}
    assert pattern_values(make_biased(1, Fraction(1, 10))) is None


@pytest.mark.parametrize("seed", range(6))
def test_subtracting_a_mixed_part_leaves_the_other(
    seed: int, random_box: Callable[[int], Box]
) -> None:
    rng = random.Random(seed)
    first, second = random_box(2 * seed), random_box(2 * seed + 1)
    p = Fraction(rng.randint(1, 19), 20)
    assert subtract_component(mix([p, 1 - p], [first, second]), p, first) == second


@pytest.mark.parametrize("seed", range(4))
def test_tensor_and_mix_keep_boxes_nonsignalling(
    seed: int, random_box: Callable[[int], Box]
) -> None:
    a, b, c = (random_box(3 * seed + i) for i in range(3))
    w = Fraction(random.Random(seed).randint(0, 12), 12)
    for box in (a, b, c):
        assert is_nonsignalling(box)
    assert is_nonsignalling(tensor(a, b))
    assert is_nonsignalling(tensor(tensor(a, b), c))
    assert is_nonsignalling(mix([w, 1 - w], [a, b]))
    assert is_nonsignalling(mix([w, 1 - w], [tensor(a, b), tensor(b, c)]))
