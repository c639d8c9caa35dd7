"""Regression error metrics: RMSE, MAE and the explained-over-total R^2 form."""

from __future__ import annotations

import numpy as np


class DegenerateMetricError(ValueError):
    pass


def _check_pairs(y_true, y_pred, min_n=1):
    y = np.asarray(y_true, dtype=float).ravel()
    yhat = np.asarray(y_pred, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.shape[0]} actual vs {yhat.shape[0]} predicted")
    if y.shape[0] < min_n:
        raise ValueError(f"need at least {min_n} prediction pair(s)")
    if not (np.isfinite(y).all() and np.isfinite(yhat).all()):
        raise ValueError("prediction pairs must be finite")
    return y, yhat


def rmse(y_true, y_pred) -> float:
    y, yhat = _check_pairs(y_true, y_pred)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def mae(y_true, y_pred) -> float:
    y, yhat = _check_pairs(y_true, y_pred)
    return float(np.mean(np.abs(y - yhat)))


def r2_paper(y_true, y_pred) -> float:
    """Explained spread of the predictions over explained plus residual spread.

    ``sum((yhat - ybar)**2) / (sum((yhat - ybar)**2) + sum((yhat - y)**2))``
    with ``ybar`` the mean of the actual values. Bounded to [0, 1], unlike
    :func:`r2_standard`.
    """
    y, yhat = _check_pairs(y_true, y_pred, min_n=2)
    explained = np.sum((yhat - y.mean()) ** 2)
    residual = np.sum((yhat - y) ** 2)
    denom = explained + residual
    if denom <= 0:
        raise DegenerateMetricError("degenerate R² denominator")
    return float(explained / denom)


def r2_standard(y_true, y_pred) -> float:
    """``1 - SSE/SST``; may be negative. ``nan`` when ``y`` is constant."""
    y, yhat = _check_pairs(y_true, y_pred, min_n=2)
    sst = np.sum((y - y.mean()) ** 2)
    if sst == 0:
        return float("nan")
    return float(1.0 - np.sum((y - yhat) ** 2) / sst)


def metrics_report(y_true, y_pred) -> dict[str, float]:
    return {
        "rmse": rmse(y_true, y_pred),
        "mae": mae(y_true, y_pred),
        "r2_paper": r2_paper(y_true, y_pred),
        "r2_standard": r2_standard(y_true, y_pred),
    }
