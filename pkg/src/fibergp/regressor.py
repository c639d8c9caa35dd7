"""scikit-learn estimator wrapping the GP engine."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import FEATURE_SYMBOLS
from .engine import GPConfig, run
from .expr import to_infix


def _seed_from(random_state) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
    if isinstance(random_state, np.random.SeedSequence):
        return int(random_state.generate_state(1, np.uint64)[0])
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(2**63))
    return int(random_state)


class SymbolicRegressor(RegressorMixin, BaseEstimator):
    """Symbolic regression by tree-based genetic programming.

    Parameters mirror :class:`~fibergp.engine.GPConfig`; ``random_state`` may
    be an int, a ``SeedSequence``, a ``Generator`` or ``None``.

    Attributes
    ----------
    best_ : Individual
        Lowest-fitness program found, with its output scale.
    run_result_ : RunResult
        Full run record: fitness history and impact accumulator.
    """

    def __init__(
        self,
        population_size=500,
        generations=100,
        tournament_size=5,
        crossover_rate=0.85,
        mutation_rate=0.10,
        elitism=1,
        init_depth=(2, 5),
        max_depth=10,
        erc_range=(-10.0, 10.0),
        metric="rmse",
        linear_scaling=True,
        random_state=None,
    ):
        self.population_size = population_size
        self.generations = generations
        self.tournament_size = tournament_size
        self.crossover_rate = crossover_rate
        self.mutation_rate = mutation_rate
        self.elitism = elitism
        self.init_depth = init_depth
        self.max_depth = max_depth
        self.erc_range = erc_range
        self.metric = metric
        self.linear_scaling = linear_scaling
        self.random_state = random_state

    def _config(self) -> GPConfig:
        return GPConfig(
            population_size=self.population_size,
            generations=self.generations,
            tournament_size=self.tournament_size,
            crossover_rate=self.crossover_rate,
            mutation_rate=self.mutation_rate,
            elitism_count=self.elitism,
            init_depth=self.init_depth,
            max_depth=self.max_depth,
            erc_range=self.erc_range,
            fitness_metric=self.metric,
            linear_scaling=self.linear_scaling,
            seed=_seed_from(self.random_state),
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        self.run_result_ = run(self._config(), X, y)
        self.best_ = self.run_result_.best
        return self

    def predict(self, X):
        check_is_fitted(self, "best_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.best_.predict(X)

    @property
    def program_(self):
        check_is_fitted(self, "best_")
        return self.best_.scaled_tree()

    @property
    def feature_importances_(self) -> np.ndarray:
        """Relative impact of each input over every population of the run."""
        check_is_fitted(self, "run_result_")
        return self.run_result_.impact.relative()

    def __str__(self):
        if not hasattr(self, "best_"):
            return self.__repr__()
        names = FEATURE_SYMBOLS if self.n_features_in_ == len(FEATURE_SYMBOLS) else [
            f"x{i}" for i in range(self.n_features_in_)
        ]
        return to_infix(self.program_, names)
