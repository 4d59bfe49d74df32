"""Adversarial search for strategies that lose few CHSH rounds.

Uniform sampling rarely meets the strategies that come closest to a counterexample. A
TPE-guided study treats each output of the two response tables as a parameter and
minimises the worst-case number of lost rounds instead.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Literal

import optuna
from optuna.samplers import TPESampler
from optuna.study import Study
from optuna.study import create_study
from optuna.trial import Trial

from prbox.exceptions import InvalidInputError
from prbox.roundloss import round_threshold
from prbox.strategies import LocalDetStrategy
from prbox.strategies import biased_feasible
from prbox.strategies import worst_input


_logger = logging.getLogger(__name__)

SearchTarget = Literal["round_loss", "biased"]


@dataclass(frozen=True)
class SearchReport:
    """Best strategy met by an adversarial search.

    ``bound`` is the worst-case loss every strategy is claimed to reach: ``ceil(n / 2)``
    in general and ``n`` for positive-weight strategies on biased boxes.
    """

    n: int
    target: SearchTarget
    trials: int
    seed: int
    best_value: int
    best_strategy: LocalDetStrategy
    bound: int

    @property
    def passed(self) -> bool:
        return self.best_value >= self.bound


def _strategy_from_params(params: dict[str, int], size: int) -> LocalDetStrategy:
    return LocalDetStrategy.binary(
        [params[f"x{u}"] for u in range(size)], [params[f"y{v}"] for v in range(size)]
    )


class _Objective:
    def __init__(self, n: int, target: SearchTarget) -> None:
        self._n = n
        self._size = 1 << n
        self._target = target

    def __call__(self, trial: Trial) -> int:
        top = self._size - 1
        params = {f"x{u}": trial.suggest_int(f"x{u}", 0, top) for u in range(self._size)}
        params.update({f"y{v}": trial.suggest_int(f"y{v}", 0, top) for v in range(self._size)})
        strategy = _strategy_from_params(params, self._size)
        if self._target == "biased" and not biased_feasible(strategy):
            # Zero-weight strategies are outside the claim.
            return self._n + 1
        return worst_input(strategy)[2]


def adversarial_search(
    n: int, *, target: SearchTarget = "round_loss", n_trials: int = 200, seed: int = 20100
) -> SearchReport:
    """Runs a seeded TPE study minimising the worst-case number of lost rounds.

    Args:
        n:
            Number of boxes.
        target:
            ``"round_loss"`` searches all strategies; ``"biased"`` only those keeping
            positive weight against maximally biased boxes.
        n_trials:
            Number of strategies evaluated.
        seed:
            Seed of the TPE sampler.
    """
    if n < 1 or n > 6:
        raise InvalidInputError(f"Adversarial search supports 1 <= n <= 6, got {n}.")
    if target not in ("round_loss", "biased"):
        raise InvalidInputError(f"Unknown search target {target!r}.")
    verbosity = optuna.logging.get_verbosity()
    optuna.logging.set_verbosity(optuna.logging.WARNING)
    try:
        study: Study = create_study(direction="minimize", sampler=TPESampler(seed=seed))
        study.optimize(_Objective(n, target), n_trials=n_trials)
    finally:
        optuna.logging.set_verbosity(verbosity)

    best = study.best_trial
    strategy = _strategy_from_params(best.params, 1 << n)
    bound = n if target == "biased" else round_threshold(n)
    report = SearchReport(n, target, n_trials, seed, int(best.value), strategy, bound)
    if report.passed:
        _logger.info(
            f"Search over {n_trials} trials (seed {seed}) found no strategy losing fewer "
            f"than {bound} rounds; best {strategy} loses {report.best_value}."
        )
    else:
        _logger.warning(f"Search found {strategy} losing only {report.best_value} rounds.")
    return report
