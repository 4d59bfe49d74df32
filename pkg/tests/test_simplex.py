from fractions import Fraction

import pytest

from prbox.boxes import EPS
from prbox.boxes import make_isotropic
from prbox.exceptions import BudgetExceededError
from prbox.exceptions import InvalidInputError
from prbox.exceptions import LPInfeasibleError
from prbox.exceptions import LPUnboundedError
from prbox.lp import ExactSimplex
from prbox.lp import LPProblem
from prbox.lp import solve_exact


def _small_problem() -> LPProblem:
    # max x1 + x2 with x1 <= 1, x2 <= 2, x1 + x2 <= 5/2.
    return LPProblem.explicit(
        columns=[{0: 1, 2: 1}, {1: 1, 2: 1}],
        rhs=[1, 2, Fraction(5, 2)],
        labels=["x1", "x2"],
    )


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_solve_small_problem(rule: str) -> None:
    solution = solve_exact(_small_problem(), rule=rule)  # type: ignore[arg-type]
    assert solution.objective == Fraction(5, 2)
    assert sum(solution.primal.values()) == Fraction(5, 2)
    assert solution.dual == (Fraction(0), Fraction(0), Fraction(1))


def test_solve_with_costs() -> None:
    problem = LPProblem.explicit(
        columns=[{0: 1}, {0: 1}], rhs=[3], objective=[1, 2], labels=["cheap", "dear"]
    )
    solution = solve_exact(problem)
    assert solution.primal == {"dear": Fraction(3)}
    assert solution.objective == 6
    assert solution.dual == (Fraction(2),)


def test_zero_rows_force_columns_out() -> None:
    problem = LPProblem.explicit(columns=[{0: 1, 1: 1}, {1: 1}], rhs=[0, 1], labels=["a", "b"])
    solution = solve_exact(problem)
    assert solution.primal == {"b": Fraction(1)}
    assert solution.objective == 1
    # Every column stays dual feasible, including the one removed with the zero row.
    assert solution.dual[0] + solution.dual[1] >= 1
    assert solution.dual[1] >= 1


def test_negative_rhs_is_infeasible() -> None:
    with pytest.raises(LPInfeasibleError):
        solve_exact(LPProblem.explicit(columns=[{0: 1}], rhs=[-1]))


def test_unbounded_column() -> None:
    with pytest.raises(LPUnboundedError):
        solve_exact(LPProblem.explicit(columns=[{0: 0}], rhs=[1]))


def test_symbolic_rhs_needs_value() -> None:
    with pytest.raises(InvalidInputError):
        LPProblem.local_part(make_isotropic(1, EPS)).rational_rhs()


def test_at_substitutes_parameter() -> None:
    problem = LPProblem.local_part(make_isotropic(1, EPS)).at(Fraction(1, 8))
    assert sorted(set(problem.rational_rhs())) == [Fraction(1, 16), Fraction(7, 16)]


def test_invalid_columns() -> None:
    with pytest.raises(InvalidInputError):
        LPProblem.explicit(columns=[{3: 1}], rhs=[1])
    with pytest.raises(InvalidInputError):
        LPProblem.explicit(columns=[{0: -1}], rhs=[1])
    with pytest.raises(InvalidInputError):
        LPProblem(rhs=(Fraction(1),))


def test_implicit_problem_enumerates_strategies() -> None:
    solution = solve_exact(LPProblem.local_part(make_isotropic(1, Fraction(1, 8))))
    assert solution.objective == Fraction(1, 2)


def test_implicit_problem_respects_budget() -> None:
    with pytest.raises(BudgetExceededError):
        solve_exact(LPProblem.local_part(make_isotropic(1, Fraction(1, 8))), budget=10)


def test_warm_start_adds_columns() -> None:
    simplex = ExactSimplex([Fraction(1), Fraction(2)])
    simplex.add_columns([{0: 1}])
    assert simplex.solve().objective == 1
    simplex.add_columns([{1: 1}], labels=["late"])
    solution = simplex.solve()
    assert solution.objective == 3
    assert solution.primal["late"] == 2
    assert simplex.n_columns == 2


def test_iteration_limit() -> None:
    simplex = ExactSimplex([Fraction(1)], max_iterations=0)
    simplex.add_columns([{0: 1}])
    with pytest.raises(BudgetExceededError):
        simplex.solve()


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_degenerate_problem_terminates(rule: str) -> None:
    # Every column through row 0 is stuck at the zero-slack vertex.
    simplex = ExactSimplex([0] + [1] * 7, rule=rule)  # type: ignore[arg-type]
    simplex.add_columns([{0: 1, i: 1} for i in range(1, 8)] + [{i: 1} for i in range(1, 8)])
    assert simplex.solve().objective == 7
