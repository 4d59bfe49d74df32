"""Exact scalars: rationals and dense univariate polynomials over the rationals.

Every probability in prbox is either a :class:`fractions.Fraction` or a :class:`Poly` in
the noise parameter. Nothing in this module touches floating point.
"""

from __future__ import annotations

from collections.abc import Iterable
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
import math
from typing import Tuple
from typing import Union

from prbox.exceptions import InvalidInputError


Interval = Tuple[Fraction, Fraction]
Scalar = Union[Fraction, "Poly"]


def as_rational(value: int | Fraction | str) -> Fraction:
    """Converts an integer, fraction or ``"p/q"`` string to a rational."""
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise InvalidInputError(f"Expected an exact rational, got {type(value).__name__}.")


def as_scalar(value: int | Fraction | Poly | str) -> Scalar:
    if isinstance(value, Poly):
        return value
    return as_rational(value)


@dataclass(frozen=True, eq=False)
class Poly:
    """Dense univariate polynomial with rational coefficients.

    Coefficients are stored constant term first, with trailing zeros stripped, so the
    zero polynomial has no coefficients and degree -1. Constants adopt the variable of
    whatever they are combined with.

    Args:
        coefficients:
            Coefficients ordered from the constant term upwards.
        variable:
            Name of the formal variable, ``"eps"`` or ``"delta"`` in practice.
    """

    coefficients: tuple[Fraction, ...]
    variable: str = "eps"

    def __post_init__(self) -> None:
        coefficients = [Fraction(c) for c in self.coefficients]
        while coefficients and coefficients[-1] == 0:
            coefficients.pop()
        object.__setattr__(self, "coefficients", tuple(coefficients))

    @classmethod
    def symbol(cls, variable: str = "eps") -> Poly:
        return cls((Fraction(0), Fraction(1)), variable)

    @classmethod
    def constant(cls, value: int | Fraction, variable: str = "eps") -> Poly:
        return cls((Fraction(value),), variable)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def is_constant(self) -> bool:
        return self.degree <= 0

    @property
    def constant_term(self) -> Fraction:
        return self.coefficients[0] if self.coefficients else Fraction(0)

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coefficients[-1] if self.coefficients else Fraction(0)

    def lowest_order(self) -> int:
        """Index of the first nonzero coefficient, -1 for the zero polynomial."""
        for order, c in enumerate(self.coefficients):
            if c != 0:
                return order
        return -1

    def __call__(self, x: int | Fraction) -> Fraction:
        return poly_eval(self, x)

    def _coerce(self, other: object) -> Poly | None:
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly((Fraction(other),), self.variable)
        return None

    def _joint_variable(self, other: Poly) -> str:
        if other.is_constant():
            return self.variable
        if self.is_constant():
            return other.variable
        if self.variable != other.variable:
            raise InvalidInputError(
                f"Cannot combine polynomials in {self.variable!r} and {other.variable!r}."
            )
        return self.variable

    def __add__(self, other: object) -> Poly:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        variable = self._joint_variable(rhs)
        size = max(len(self.coefficients), len(rhs.coefficients))
        lhs_c = self.coefficients + (Fraction(0),) * (size - len(self.coefficients))
        rhs_c = rhs.coefficients + (Fraction(0),) * (size - len(rhs.coefficients))
        return Poly(tuple(a + b for a, b in zip(lhs_c, rhs_c)), variable)

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly(tuple(-c for c in self.coefficients), self.variable)

    def __pos__(self) -> Poly:
        return self

    def __sub__(self, other: object) -> Poly:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: object) -> Poly:
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs + (-self)

    def __mul__(self, other: object) -> Poly:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        variable = self._joint_variable(rhs)
        if self.is_zero() or rhs.is_zero():
            return Poly((), variable)
        product = [Fraction(0)] * (len(self.coefficients) + len(rhs.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if a == 0:
                continue
            for j, b in enumerate(rhs.coefficients):
                product[i + j] += a * b
        return Poly(tuple(product), variable)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> Poly:
        if not isinstance(exponent, int) or exponent < 0:
            raise InvalidInputError("Polynomials only support nonnegative integer powers.")
        result = Poly.constant(1, self.variable)
        for _ in range(exponent):
            result = result * self
        return result

    def divmod(self, divisor: Poly) -> tuple[Poly, Poly]:
        """Polynomial long division returning ``(quotient, remainder)``."""
        if divisor.is_zero():
            raise ZeroDivisionError("Polynomial division by zero.")
        variable = self._joint_variable(divisor)
        remainder = list(self.coefficients)
        quotient = [Fraction(0)] * max(len(remainder) - len(divisor.coefficients) + 1, 0)
        lead = divisor.leading_coefficient
        for shift in range(len(quotient) - 1, -1, -1):
            factor = remainder[shift + divisor.degree] / lead
            quotient[shift] = factor
            if factor == 0:
                continue
            for i, c in enumerate(divisor.coefficients):
                remainder[shift + i] -= factor * c
        return Poly(tuple(quotient), variable), Poly(tuple(remainder), variable)

    def __truediv__(self, other: object) -> Poly:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        if rhs.is_constant():
            if rhs.is_zero():
                raise ZeroDivisionError("Polynomial division by zero.")
            inverse = 1 / rhs.constant_term
            return Poly(tuple(c * inverse for c in self.coefficients), self.variable)
        quotient, remainder = self.divmod(rhs)
        if not remainder.is_zero():
            raise InvalidInputError(f"{self} is not divisible by {rhs}.")
        return quotient

    def __rtruediv__(self, other: object) -> Poly:
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs / self

    def __eq__(self, other: object) -> bool:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        if self.variable != rhs.variable and not (self.is_constant() and rhs.is_constant()):
            return False
        return self.coefficients == rhs.coefficients

    def __hash__(self) -> int:
        if self.is_constant():
            return hash(self.constant_term)
        return hash((self.coefficients, self.variable))

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms: list[str] = []
        for power, c in enumerate(self.coefficients):
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            magnitude = abs(c)
            if power == 0:
                body = str(magnitude)
            else:
                monomial = self.variable if power == 1 else f"{self.variable}^{power}"
                body = monomial if magnitude == 1 else f"{magnitude}*{monomial}"
            terms.append(f"{sign} {body}")
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return f"Poly({str(self)!r})"


def poly_eval(p: Scalar | int, x: int | Fraction) -> Fraction:
    """Evaluates a scalar at a rational point with Horner's scheme."""
    if not isinstance(p, Poly):
        return Fraction(p)
    x = Fraction(x)
    value = Fraction(0)
    for c in reversed(p.coefficients):
        value = value * x + c
    return value


def poly_interpolate(
    points: Sequence[tuple[int | Fraction, int | Fraction]],
    max_degree: int,
    variable: str = "eps",
) -> Poly | None:
    """Fits the unique polynomial of degree at most ``max_degree`` through sample points.

    The polynomial is built from the first ``max_degree + 1`` points with Newton's divided
    differences, then checked against every remaining point.

    Args:
        points:
            Pairs ``(x, y)`` of exact rationals with distinct abscissae.
        max_degree:
            Highest degree allowed for the fit.
        variable:
            Variable name of the returned polynomial.

    Returns:
        The fitted polynomial, or :obj:`None` when some point is off the fit.
    """
    if max_degree < 0:
        raise InvalidInputError("max_degree must be nonnegative.")
    samples = [(Fraction(x), Fraction(y)) for x, y in points]
    if len(samples) < max_degree + 1:
        raise InvalidInputError(
            f"Need at least {max_degree + 1} points for degree {max_degree}, got {len(samples)}."
        )
    abscissae = [x for x, _ in samples]
    if len(set(abscissae)) != len(abscissae):
        raise InvalidInputError("Interpolation points must have distinct abscissae.")

    base = samples[: max_degree + 1]
    table = [y for _, y in base]
    for level in range(1, len(base)):
        for i in range(len(base) - 1, level - 1, -1):
            table[i] = (table[i] - table[i - 1]) / (base[i][0] - base[i - level][0])

    fit = Poly((table[-1],), variable)
    for i in range(len(base) - 2, -1, -1):
        fit = fit * Poly((-base[i][0], Fraction(1)), variable) + table[i]

    for x, y in samples[max_degree + 1 :]:
        if poly_eval(fit, x) != y:
            return None
    return fit


def poly_equal(p: Scalar | int, q: Scalar | int) -> bool:
    """Structural equality of two scalars over the same variable."""
    lhs = p if isinstance(p, Poly) else Poly.constant(p)
    rhs = q if isinstance(q, Poly) else Poly.constant(q)
    if lhs.variable != rhs.variable and not (lhs.is_constant() or rhs.is_constant()):
        raise InvalidInputError(
            f"Cannot compare polynomials in {lhs.variable!r} and {rhs.variable!r}."
        )
    return lhs.coefficients == rhs.coefficients


def exact_divide(value: Scalar, divisor: Scalar) -> Scalar:
    if isinstance(value, Poly) or isinstance(divisor, Poly):
        result = as_poly(value) / as_poly(divisor)
        return result
    return value / divisor


def as_poly(value: Scalar | int, variable: str = "eps") -> Poly:
    return value if isinstance(value, Poly) else Poly.constant(value, variable)


def variable_of(values: Iterable[object]) -> str | None:
    """Returns the variable of the first nonconstant polynomial among ``values``."""
    for value in values:
        if isinstance(value, Poly) and not value.is_constant():
            return value.variable
    return None


def _bernstein_coefficients(p: Poly, lo: Fraction, hi: Fraction) -> list[Fraction]:
    shifted = Poly((), p.variable)
    substitution = Poly((lo, hi - lo), p.variable)
    for c in reversed(p.coefficients):
        shifted = shifted * substitution + c
    d = p.degree
    q = list(shifted.coefficients) + [Fraction(0)] * (d + 1 - len(shifted.coefficients))
    return [
        sum((Fraction(math.comb(i, k), math.comb(d, k)) * q[k] for k in range(i + 1)), Fraction(0))
        for i in range(d + 1)
    ]


def _bernstein_nonnegative(coefficients: list[Fraction], depth: int) -> bool:
    if min(coefficients) >= 0:
        return True
    if coefficients[0] < 0 or coefficients[-1] < 0 or depth == 0:
        return False
    left, right = [coefficients[0]], [coefficients[-1]]
    current = coefficients
    while len(current) > 1:
        current = [(a + b) / 2 for a, b in zip(current, current[1:])]
        left.append(current[0])
        right.append(current[-1])
    right.reverse()
    return _bernstein_nonnegative(left, depth - 1) and _bernstein_nonnegative(right, depth - 1)


def is_nonnegative(value: Scalar | int, interval: Interval | None = None, depth: int = 12) -> bool:
    """Decides ``value >= 0`` exactly, for polynomials on the whole of ``interval``.

    Polynomials are checked through their Bernstein coefficients on the interval, with
    bisection up to ``depth`` levels. A polynomial that is still undecided after that
    counts as negative.
    """
    if not isinstance(value, Poly):
        return value >= 0
    if value.is_constant():
        return value.constant_term >= 0
    if interval is None:
        raise InvalidInputError("Symbolic entries need a parameter interval to be compared.")
    lo, hi = Fraction(interval[0]), Fraction(interval[1])
    if lo > hi:
        raise InvalidInputError(f"Empty interval [{lo}, {hi}].")
    if lo == hi:
        return poly_eval(value, lo) >= 0
    return _bernstein_nonnegative(_bernstein_coefficients(value, lo, hi), depth)


def parse_rational(text: str) -> Fraction:
    """Parses ``"p/q"`` (or an integer or finite decimal) into an exact rational."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidInputError(f"{text!r} is not an exact rational.") from e


def format_rational(value: int | Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def format_scalar(value: Scalar | int) -> str:
    if isinstance(value, Poly):
        return str(value)
    return format_rational(value)


def scalar_to_json(value: Scalar | int) -> str | list[str]:
    if isinstance(value, Poly) and not value.is_constant():
        return [format_rational(c) for c in value.coefficients]
    if isinstance(value, Poly):
        return format_rational(value.constant_term)
    return format_rational(value)


def scalar_from_json(data: object, variable: str = "eps") -> Scalar:
    if isinstance(data, str):
        return parse_rational(data)
    if isinstance(data, list) and all(isinstance(c, str) for c in data):
        return Poly(tuple(parse_rational(c) for c in data), variable)
    raise InvalidInputError(f"Cannot read a scalar from {data!r}.")
