from fractions import Fraction

import pytest

from prbox.appendix import quarter_box
from prbox.appendix import snk
from prbox.appendix import snk_box
from prbox.appendix import snk_expansion_check
from prbox.appendix import word
from prbox.boxes import is_nonsignalling
from prbox.decompositions import appendix_sum
from prbox.exceptions import InvalidInputError
from prbox.localpart import local_part


def test_quarter_box_is_local() -> None:
    box = quarter_box()
    assert {box[cell] for cell in box.cells()} == {Fraction(3, 8), Fraction(1, 8)}
    assert local_part(box).fraction == 1


def test_word_places_quarter_noise() -> None:
    box = word((1,), 2)
    assert box.shape == (4, 4, 4, 4)
    assert is_nonsignalling(box)


@pytest.mark.parametrize("n,k,mass", [(1, 0, 1), (2, 1, 2), (3, 1, 3), (3, 2, 3)])
def test_snk_mass(n: int, k: int, mass: int) -> None:
    assert snk_box(n, k).mass == mass


def test_snk_two_one_is_the_appendix_sum() -> None:
    assert snk_box(2, 1) == appendix_sum()


@pytest.mark.parametrize(
    "n,k,fraction",
    [(1, 0, Fraction(0)), (1, 1, Fraction(1)), (2, 0, Fraction(0)), (2, 1, Fraction(1, 2))],
)
def test_snk_local_parts(n: int, k: int, fraction: Fraction) -> None:
    report = snk(n, k)
    assert report.fraction == fraction
    assert report.absolute == fraction * report.mass
    assert report.certificate.certified
    assert not report.exploratory


@pytest.mark.slow
def test_snk_three_one_is_exploratory() -> None:
    report = snk(3, 1)
    assert report.exploratory
    assert 0 <= report.fraction <= 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_expansion_matches_isotropic_box(n: int) -> None:
    assert snk_expansion_check(n)
    assert snk_expansion_check(n, Fraction(1, 16))


@pytest.mark.parametrize("n,k", [(0, 0), (4, 1), (2, 3), (2, -1)])
def test_invalid_snk(n: int, k: int) -> None:
    with pytest.raises(InvalidInputError):
        snk_box(n, k)
