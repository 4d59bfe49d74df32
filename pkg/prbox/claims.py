"""Claim suites run by ``prbox verify``.

Each suite returns :class:`~prbox.terminal.Claim` rows; a suite passes when all rows do.
"""

from __future__ import annotations

from fractions import Fraction
import logging

from prbox.appendix import snk
from prbox.appendix import snk_box
from prbox.appendix import snk_expansion_check
from prbox.boxes import DELTA
from prbox.boxes import EPS
from prbox.boxes import is_nonsignalling
from prbox.boxes import make_biased
from prbox.boxes import make_isotropic
from prbox.decompositions import APPENDIX_POINT
from prbox.decompositions import EQ5_STRATEGIES
from prbox.decompositions import LEMMA3_BASES
from prbox.decompositions import appendix_sum
from prbox.decompositions import known_decomposition
from prbox.decompositions import orbit_sizes
from prbox.decompositions import verify_decomposition
from prbox.exceptions import InvalidInputError
from prbox.lp import LPProblem
from prbox.lp import verify
from prbox.managers import JobManager
from prbox.numeric import format_scalar
from prbox.numeric import poly_equal
from prbox.roundloss import exhaustive_biased_loss
from prbox.roundloss import round_loss
from prbox.roundloss import sample_biased_loss
from prbox.search import adversarial_search
from prbox.strategies import biased_feasible
from prbox.strategies import depolarization_images
from prbox.strategies import is_product
from prbox.strategies import worst_input
from prbox.terminal import Claim


_logger = logging.getLogger(__name__)

SUITES = ("eq3", "eq5", "lemma3", "appendix", "lemmas")


def eq3_claims() -> list[Claim]:
    decomposition = known_decomposition("eq3")
    check = verify_decomposition(decomposition, make_isotropic(1, EPS))
    return [
        Claim("eight strategies at weight eps/2 plus (1-4eps) PR box", bool(check), check.message),
        Claim(
            "local weight is 4 eps",
            poly_equal(decomposition.local_weight, 4 * EPS),
            format_scalar(decomposition.local_weight),
        ),
    ]


def eq5_claims() -> list[Claim]:
    decomposition = known_decomposition("eq5")
    check = verify_decomposition(decomposition, make_biased(1, DELTA))
    feasible = [biased_feasible(s) for s in EQ5_STRATEGIES]
    return [
        Claim(
            "three strategies at weight delta plus (1-3delta) PR box", bool(check), check.message
        ),
        Claim("every strategy keeps positive weight", all(feasible), str(feasible)),
        Claim(
            "local weight is 3 delta",
            poly_equal(decomposition.local_weight, 3 * DELTA),
            format_scalar(decomposition.local_weight),
        ),
    ]


def lemma3_claims() -> list[Claim]:
    decomposition = known_decomposition("lemma3")
    check = verify_decomposition(decomposition, make_isotropic(2, EPS))
    images = [len(depolarization_images(base)) for base in LEMMA3_BASES]
    distinct = orbit_sizes(LEMMA3_BASES)
    losses = [worst_input(base)[2] for base in LEMMA3_BASES]
    count = len(decomposition.terms)
    return [
        Claim("128 strategies plus (1-4eps) P0 x P0", bool(check), check.message),
        Claim("strategy count is 128", count == 128, str(count)),
        Claim("each base has 64 group images", images == [64, 64], f"{distinct} distinct"),
        Claim(
            "local weight is 4 eps",
            poly_equal(decomposition.local_weight, 4 * EPS),
            format_scalar(decomposition.local_weight),
        ),
        Claim("base strategies never lose both rounds", max(losses) <= 1, f"worst {losses}"),
    ]


def _snk_claims(n: int, manager: JobManager | None) -> list[Claim]:
    claims = []
    for size in range(1, min(n, 2) + 1):
        none = snk(size, 0, manager=manager)
        claims.append(
            Claim(f"S({size},0) is fully non-local", none.fraction == 0, f"{none.fraction}")
        )
        full = snk(size, size, manager=manager)
        claims.append(
            Claim(f"S({size},{size}) is fully local", full.fraction == 1, f"{full.fraction}")
        )
        expansion = snk_expansion_check(size)
        claims.append(
            Claim(f"words expand the isotropic box, n={size}", bool(expansion), expansion.message)
        )
    if n >= 3:
        expansion = snk_expansion_check(3, Fraction(1, 10))
        claims.append(
            Claim("words expand the isotropic box, n=3", bool(expansion), expansion.message)
        )
        for k in (1, 2):
            report = snk(3, k, manager=manager)
            claims.append(
                Claim(
                    f"S(3,{k}) solved (exploratory)",
                    report.certificate.certified,
                    f"local part {report.absolute} of mass {report.mass}",
                )
            )
    return claims


def appendix_claims(n: int = 2, manager: JobManager | None = None) -> list[Claim]:
    if n < 2 or n > 3:
        raise InvalidInputError(f"Appendix claims are available for n in (2, 3), got {n}.")
    total = snk_box(2, 1)
    decomposition = known_decomposition("appendix_PL")
    check = verify_decomposition(decomposition, total)
    rest = decomposition.remainder
    images = depolarization_images(APPENDIX_POINT)
    report = snk(2, 1, manager=manager)
    audit = verify(report.certificate, LPProblem.local_part(total), manager=manager)
    claims = [
        Claim("S(2,1) is P0 x P1/4 + P1/4 x P0", total == appendix_sum(), f"mass {total.mass}"),
        Claim("S(2,1) = P_L + P_NL", bool(check), check.message),
        Claim(
            "P_NL is non-signalling with mass 1",
            is_nonsignalling(rest) and rest.mass == 1,
            f"mass {format_scalar(rest.mass)}",
        ),
        Claim(
            "orbit of the appendix point has 64 images",
            len(images) == 64,
            f"{len(set(images))} distinct",
        ),
        Claim("no orbit point is a product strategy", not any(is_product(s, 1) for s in images)),
        Claim(
            "S(2,1) local part is half its mass",
            report.certificate.certified and report.fraction == Fraction(1, 2),
            f"{report.absolute} of {report.mass}",
        ),
        Claim("S(2,1) certificate re-verifies", bool(audit), audit.message),
    ]
    return claims + _snk_claims(n, manager)


def lemma_claims(
    n: int,
    *,
    samples: int = 10**6,
    seed: int = 20100,
    trials: int = 200,
    manager: JobManager | None = None,
) -> list[Claim]:
    """Round-loss claims for ``n`` boxes: exact where feasible, sampled and searched beyond."""
    if n < 1 or n > 5:
        raise InvalidInputError(f"Round-loss claims are available for 1 <= n <= 5, got {n}.")
    claims = []
    for report in round_loss(n, samples=samples, seed=seed, manager=manager):
        claims.append(
            Claim(
                f"every strategy loses >= {report.threshold} rounds somewhere ({report.method})",
                report.passed,
                f"{report.checked} checked, minimum {report.minimum_worst}",
            )
        )
        if report.method == "exhaustive" and n == 2:
            claims.append(
                Claim(
                    "a strategy never loses both rounds",
                    report.witness is not None,
                    str(report.witness),
                )
            )
    if n <= 2:
        biased = exhaustive_biased_loss(n)
    else:
        biased = sample_biased_loss(n, samples, seed, manager=manager)
    claims.append(
        Claim(
            f"positive-weight strategies on biased boxes lose all rounds ({biased.method})",
            biased.passed,
            f"{biased.checked} checked",
        )
    )
    search = adversarial_search(n, n_trials=trials, seed=seed)
    claims.append(
        Claim(
            f"adversarial search finds no strategy losing < {search.bound} rounds",
            search.passed,
            f"best {search.best_strategy} loses {search.best_value}",
        )
    )
    return claims
