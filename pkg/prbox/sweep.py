"""Piecewise polynomial recovery of the local part along a noise grid.

The local part of ``n`` isotropic boxes is the minimum of finitely many polynomials of
degree at most ``n`` in ``eps``. Sampling it exactly on a grid and fitting maximal runs of
samples with one polynomial recovers the pieces; a breakpoint lies between the last sample
of one piece and the first of the next.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
import logging
from typing import Callable
from typing import Optional

from prbox.boxes import BIASED_RANGE
from prbox.boxes import ISOTROPIC_RANGE
from prbox.boxes import make_family
from prbox.exceptions import InvalidInputError
from prbox.localpart import SolveMode
from prbox.localpart import biased_local_part
from prbox.localpart import local_part
from prbox.localpart import lower_bound_isotropic
from prbox.localpart import pairing_lower_bound
from prbox.localpart import upper_bound_isotropic
from prbox.lp import Certificate
from prbox.managers import JobManager
from prbox.managers import LocalJobManager
from prbox.numeric import Poly
from prbox.numeric import format_rational
from prbox.numeric import parse_rational
from prbox.numeric import poly_eval
from prbox.numeric import poly_interpolate


_logger = logging.getLogger(__name__)

PointCallbackType = Optional[Callable[[int, "SweepSample"], None]]

# Extra samples placed inside every breakpoint bracket during refinement.
_REFINE_FACTOR = 4


@dataclass(frozen=True)
class SweepSample:
    """One solved grid point."""

    parameter: Fraction
    value: Fraction
    certified: bool
    certificate: Certificate | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Piece:
    """A polynomial matching the local part exactly at every sample in ``[lo, hi]``."""

    lo: Fraction
    hi: Fraction
    poly: Poly
    n_samples: int

    @property
    def determined(self) -> bool:
        """Whether at least one sample beyond those fixing the polynomial confirms it."""
        return self.n_samples >= self.poly.degree + 2


@dataclass(frozen=True)
class SweepResult:
    """Solved samples, fitted pieces and the consistency checks run on them.

    Args:
        family:
            Box family swept, ``"isotropic"`` or ``"biased"``.
        n:
            Number of boxes.
        samples:
            Every solved point in increasing parameter order, certified or not.
        pieces:
            Maximal polynomial runs over the certified samples.
        continuity:
            One flag per adjacent pair of pieces: whether they cross inside their bracket.
        envelope_violations:
            Parameters where a certified value leaves the proven bounds.
        lower_bound_failure:
            First parameter where the value drops below the small-noise lower bound.
        monotone:
            Whether certified values never decrease along the grid.
    """

    family: str
    n: int
    samples: tuple[SweepSample, ...]
    pieces: tuple[Piece, ...]
    continuity: tuple[bool, ...]
    envelope_violations: tuple[Fraction, ...]
    lower_bound_failure: Fraction | None
    monotone: bool

    @property
    def certified_samples(self) -> tuple[SweepSample, ...]:
        return tuple(s for s in self.samples if s.certified)

    @property
    def excluded(self) -> tuple[Fraction, ...]:
        return tuple(s.parameter for s in self.samples if not s.certified)

    @property
    def breakpoints(self) -> list[tuple[Fraction, Fraction]]:
        """Brackets ``(hi, lo)`` between consecutive pieces."""
        return [(a.hi, b.lo) for a, b in zip(self.pieces, self.pieces[1:])]

    @property
    def leading_order(self) -> int | None:
        """Lowest order with nonzero coefficient in the piece nearest zero noise."""
        if not self.pieces:
            return None
        order = self.pieces[0].poly.lowest_order()
        return order if order >= 0 else None

    @property
    def leading_coefficient(self) -> Fraction | None:
        order = self.leading_order
        return None if order is None else self.pieces[0].poly.coefficients[order]


def default_grid(family: str = "isotropic", step: Fraction = Fraction(1, 64)) -> list[Fraction]:
    """Equally spaced points covering the default parameter range of ``family``."""
    lo, hi = ISOTROPIC_RANGE if family == "isotropic" else BIASED_RANGE
    if step <= 0:
        raise InvalidInputError(f"Grid step must be positive, got {step}.")
    points = []
    value = lo
    while value <= hi:
        points.append(value)
        value += step
    return points


def parse_grid(text: str, family: str = "isotropic") -> list[Fraction]:
    """Reads either a step such as ``"1/64"`` or a comma separated list of points."""
    if "," in text:
        return sorted({parse_rational(token) for token in text.split(",") if token.strip()})
    return default_grid(family, parse_rational(text))


def _solve_point(job: tuple[str, int, Fraction, SolveMode, Optional[int]]) -> SweepSample:
    family, n, parameter, mode, budget = job
    box = make_family(family, n, parameter)
    fraction, certificate = local_part(box, mode, budget=budget)
    return SweepSample(parameter, fraction, certificate.certified, certificate)


def fit_pieces(
    samples: Sequence[SweepSample], max_degree: int, variable: str = "eps"
) -> list[Piece]:
    """Greedy maximal runs of samples lying on one polynomial of degree ``<= max_degree``.

    A run of at most ``max_degree + 1`` samples always fits; :attr:`Piece.determined`
    tells the confirmed pieces apart.
    """
    points = [(s.parameter, s.value) for s in samples]
    pieces: list[Piece] = []
    start = 0
    while start < len(points):
        fit = poly_interpolate(points[start : start + 1], 0, variable)
        stop = start + 1
        while stop < len(points):
            candidate = poly_interpolate(
                points[start : stop + 1], min(max_degree, stop - start), variable
            )
            if candidate is None:
                break
            fit, stop = candidate, stop + 1
        assert fit is not None
        pieces.append(Piece(points[start][0], points[stop - 1][0], fit, stop - start))
        start = stop
    return pieces


def _crosses(left: Piece, right: Piece) -> bool:
    """Whether the two pieces take equal values somewhere between their samples."""
    at_hi = poly_eval(left.poly, left.hi) - poly_eval(right.poly, left.hi)
    at_lo = poly_eval(left.poly, right.lo) - poly_eval(right.poly, right.lo)
    return at_hi == 0 or at_lo == 0 or (at_hi > 0) != (at_lo > 0)


def _envelope_violations(family: str, n: int, samples: Sequence[SweepSample]) -> list[Fraction]:
    violations = []
    for sample in samples:
        p, value = sample.parameter, sample.value
        if family == "isotropic":
            low = Fraction(pairing_lower_bound(n, p))  # type: ignore[arg-type]
            high = Fraction(upper_bound_isotropic(n, p))  # type: ignore[arg-type]
            ok = low <= value <= min(high, 1)
        else:
            ok = value == biased_local_part(n, p)
        if not ok:
            violations.append(p)
    return violations


def _lower_bound_failure(family: str, n: int, samples: Sequence[SweepSample]) -> Fraction | None:
    if family != "isotropic":
        return None
    for sample in samples:
        if sample.value < lower_bound_isotropic(n, sample.parameter):  # type: ignore[operator]
            return sample.parameter
    return None


def _refinement_points(pieces: Sequence[Piece], known: set[Fraction]) -> list[Fraction]:
    points = []
    for left, right in zip(pieces, pieces[1:]):
        width = right.lo - left.hi
        for k in range(1, _REFINE_FACTOR):
            point = left.hi + width * k / _REFINE_FACTOR
            if point not in known:
                points.append(point)
    return points


def sweep(
    n: int,
    grid: Sequence[Fraction | int],
    *,
    family: str = "isotropic",
    mode: SolveMode = "colgen",
    manager: JobManager | None = None,
    budget: int | None = None,
    refine: bool = True,
    on_point: PointCallbackType = None,
) -> SweepResult:
    """Solves the local part at every grid point and fits polynomial pieces.

    Args:
        n:
            Number of boxes.
        grid:
            Parameter values inside the default range of ``family``.
        family:
            ``"isotropic"`` or ``"biased"``.
        mode:
            Solve mode passed to :func:`~prbox.localpart.local_part`.
        manager:
            Optional job manager solving grid points in parallel.
        budget:
            Enumeration budget for ``mode="full"``.
        refine:
            Adds points inside every breakpoint bracket once and refits.
        on_point:
            Callback receiving ``(index, sample)`` as points finish.
    """
    points = sorted({Fraction(p) for p in grid})
    if not points:
        raise InvalidInputError("The sweep grid is empty.")
    lo, hi = ISOTROPIC_RANGE if family == "isotropic" else BIASED_RANGE
    if points[0] < lo or points[-1] > hi:
        raise InvalidInputError(f"Grid must lie within [{lo}, {hi}] for the {family} family.")

    runner = manager or LocalJobManager(1)
    variable = "eps" if family == "isotropic" else "delta"

    def solve(parameters: list[Fraction]) -> list[SweepSample]:
        jobs = [(family, n, p, mode, budget) for p in parameters]
        return runner.map(_solve_point, jobs, on_point)

    samples = solve(points)
    pieces = fit_pieces([s for s in samples if s.certified], n, variable)
    if refine and len(pieces) > 1:
        extra = _refinement_points(pieces, set(points))
        _logger.info(f"Refining {len(pieces) - 1} breakpoint brackets with {len(extra)} points.")
        samples = sorted(samples + solve(extra), key=lambda s: s.parameter)
        pieces = fit_pieces([s for s in samples if s.certified], n, variable)

    certified = [s for s in samples if s.certified]
    for sample in samples:
        if not sample.certified:
            _logger.warning(f"Point {sample.parameter} is not certified; excluded from the fit.")
    monotone = all(a.value <= b.value for a, b in zip(certified, certified[1:]))
    if not monotone:
        _logger.warning("Certified local parts decrease somewhere along the grid.")
    failure = _lower_bound_failure(family, n, certified)
    if failure is not None:
        _logger.warning(f"Local part drops below the small-noise lower bound at {failure}.")
    violations = _envelope_violations(family, n, certified)
    for parameter in violations:
        _logger.warning(f"Local part at {parameter} leaves the proven envelope.")

    result = SweepResult(
        family=family,
        n=n,
        samples=tuple(samples),
        pieces=tuple(pieces),
        continuity=tuple(_crosses(a, b) for a, b in zip(pieces, pieces[1:])),
        envelope_violations=tuple(violations),
        lower_bound_failure=failure,
        monotone=monotone,
    )
    for piece in pieces:
        _logger.info(
            f"Piece on [{format_rational(piece.lo)}, {format_rational(piece.hi)}]: "
            f"{piece.poly} from {piece.n_samples} samples."
        )
    return result
