from collections.abc import Callable

import pytest

from prbox.claims import appendix_claims
from prbox.claims import eq3_claims
from prbox.claims import eq5_claims
from prbox.claims import lemma3_claims
from prbox.claims import lemma_claims
from prbox.exceptions import InvalidInputError
from prbox.terminal import Claim


@pytest.mark.parametrize("suite", [eq3_claims, eq5_claims, lemma3_claims])
def test_decomposition_suites_pass(suite: Callable[[], list[Claim]]) -> None:
    claims = suite()
    assert claims
    assert all(c.passed for c in claims), [c for c in claims if not c.passed]


def test_appendix_claims() -> None:
    claims = appendix_claims(2)
    assert all(c.passed for c in claims), [c for c in claims if not c.passed]
    assert any("half its mass" in c.name for c in claims)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lemma_claims(n: int) -> None:
    claims = lemma_claims(n, samples=2000, seed=4, trials=10)
    assert all(c.passed for c in claims), [c for c in claims if not c.passed]


@pytest.mark.slow
def test_appendix_claims_with_three_boxes() -> None:
    claims = appendix_claims(3)
    assert all(c.passed for c in claims)


@pytest.mark.parametrize("call", [lambda: appendix_claims(1), lambda: lemma_claims(6)])
def test_claims_reject_sizes(call: Callable[[], object]) -> None:
    with pytest.raises(InvalidInputError):
        call()
