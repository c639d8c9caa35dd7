"""Multiple linear regression baseline (ordinary least squares with intercept)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

RIDGE_FALLBACK = 1e-8


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    intercept: float

    def __post_init__(self):
        if not (np.isfinite(self.weights).all() and np.isfinite(self.intercept)):
            raise ValueError("linear model has non-finite coefficients")


def ols_fit(X, y) -> LinearModel:
    """Solve the normal equations; add ``RIDGE_FALLBACK * I`` if the Gram matrix is singular."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Z = np.column_stack([X, np.ones(len(y))])
    gram = Z.T @ Z
    rhs = Z.T @ y
    if np.linalg.cond(gram) * np.finfo(float).eps >= 1:
        gram = gram + RIDGE_FALLBACK * np.eye(gram.shape[0])
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        coef = np.linalg.solve(gram + RIDGE_FALLBACK * np.eye(gram.shape[0]), rhs)
    return LinearModel(coef[:-1], float(coef[-1]))


def ols_predict(model: LinearModel, X) -> np.ndarray | float:
    X = np.asarray(X, dtype=float)
    out = X @ model.weights + model.intercept
    return float(out) if X.ndim == 1 else out


class OLSRegressor(RegressorMixin, BaseEstimator):
    """scikit-learn wrapper around :func:`ols_fit`."""

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.model_ = ols_fit(X, y)
        self.coef_ = self.model_.weights
        self.intercept_ = self.model_.intercept
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return ols_predict(self.model_, X)
