from __future__ import annotations

from fractions import Fraction
import logging

from prbox.exceptions import InvalidInputError
from prbox.lp.base import Certificate
from prbox.lp.base import CertificateCheck
from prbox.lp.base import LPProblem
from prbox.lp.pricing import price_strategies
from prbox.managers import JobManager


_logger = logging.getLogger(__name__)


def pricing_gap(
    problem: LPProblem, dual: tuple[Fraction, ...], manager: JobManager | None = None
) -> Fraction:
    """Largest reduced cost ``c_j - a_j^T y`` over the whole column set of ``problem``."""
    if problem.implicit:
        assert problem.shape is not None
        return price_strategies(dual, problem.shape, top_k=0, manager=manager).best_reduced_cost
    gap: Fraction | None = None
    for label in problem.column_labels():
        column = problem.column(label)
        reduced = problem.cost(label) - sum((a * dual[r] for r, a in column.items()), Fraction(0))
        if gap is None or reduced > gap:
            gap = reduced
    return gap if gap is not None else Fraction(0)


def verify(
    certificate: Certificate, problem: LPProblem, *, manager: JobManager | None = None
) -> CertificateCheck:
    """Re-checks a certificate against ``problem`` without trusting the solver.

    The primal weights must be nonnegative strategy weights fitting under ``b``, the dual
    must be nonnegative with ``b^T y`` equal to the objective, and no column of the full
    column set may have positive reduced cost. Certificates not marked as certified never
    pass, even when all the recorded numbers are consistent.

    Args:
        certificate:
            The certificate to audit.
        problem:
            The problem it claims to solve, with a rational right-hand side.
        manager:
            Optional job manager for the exhaustive pricing pass of implicit problems.
    """
    rhs = problem.rational_rhs()

    activity = [Fraction(0)] * len(rhs)
    objective = Fraction(0)
    for position, (label, weight) in enumerate(certificate.primal.items()):
        if weight < 0:
            return CertificateCheck(False, f"Primal weight of {label} is negative.", position)
        try:
            column = problem.column(label)
        except InvalidInputError as e:
            return CertificateCheck(False, f"Primal column {label} is unknown: {e}", position)
        for row, a in column.items():
            activity[row] += a * weight
        objective += problem.cost(label) * weight

    if len(certificate.slack) != len(rhs):
        return CertificateCheck(False, f"Slack has {len(certificate.slack)} rows, not {len(rhs)}.")
    for row, (b, used, recorded) in enumerate(zip(rhs, activity, certificate.slack)):
        if used > b:
            return CertificateCheck(False, f"Row {row} is exceeded by {used - b}.", row)
        if b - used != recorded:
            return CertificateCheck(False, f"Recorded slack of row {row} is wrong.", row)

    if len(certificate.dual) != len(rhs):
        return CertificateCheck(False, f"Dual has {len(certificate.dual)} rows, not {len(rhs)}.")
    for row, y in enumerate(certificate.dual):
        if y < 0:
            return CertificateCheck(False, f"Dual value of row {row} is negative.", row)

    if objective != certificate.objective:
        return CertificateCheck(
            False, f"Primal weights sum to {objective}, not {certificate.objective}."
        )
    dual_objective = sum((b * y for b, y in zip(rhs, certificate.dual)), Fraction(0))

    gap = pricing_gap(problem, certificate.dual, manager)
    if certificate.pricing_gap is not None and gap != certificate.pricing_gap:
        return CertificateCheck(
            False, f"Recorded pricing gap {certificate.pricing_gap} differs from {gap}."
        )
    if not certificate.certified:
        return CertificateCheck(False, "Certificate is not marked as certified.")
    if gap > 0:
        return CertificateCheck(False, f"Some column has positive reduced cost {gap}.")
    if dual_objective != objective:
        return CertificateCheck(
            False, f"Dual objective {dual_objective} differs from primal objective {objective}."
        )
    _logger.debug(f"Certificate with objective {objective} verified.")
    return CertificateCheck(True)
