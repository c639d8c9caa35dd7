import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import cross_val_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from fibergp.expr import parse_infix
from fibergp.regressor import SymbolicRegressor

FAST = dict(population_size=60, generations=8)


@pytest.fixture
def data():
    rng = np.random.default_rng(0)
    X = rng.uniform(1, 5, (20, 5))
    return X, X[:, 0] * X[:, 1] + 2


def test_params_round_trip():
    est = SymbolicRegressor(**FAST, random_state=3)
    params = est.get_params()
    assert params["population_size"] == 60 and params["random_state"] == 3
    assert clone(est).get_params() == params


def test_fit_predict_and_attributes(data):
    X, y = data
    est = SymbolicRegressor(**FAST, random_state=0).fit(X, y)
    pred = est.predict(X)
    assert pred.shape == (20,)
    assert est.score(X, y) > 0.9
    assert est.feature_importances_.sum() == pytest.approx(1)
    # the rendered model evaluates to the same predictions
    rebuilt = parse_infix(str(est))
    from fibergp.expr import evaluate_batch

    np.testing.assert_allclose(evaluate_batch(rebuilt, X), pred, rtol=1e-9)


def test_random_state_determinism(data):
    X, y = data
    a = SymbolicRegressor(**FAST, random_state=5).fit(X, y)
    b = SymbolicRegressor(**FAST, random_state=5).fit(X, y)
    assert a.best_.tree == b.best_.tree
    seeded = SymbolicRegressor(**FAST, random_state=np.random.SeedSequence(5)).fit(X, y)
    assert np.isfinite(seeded.predict(X)).all()


def test_validation(data):
    X, y = data
    with pytest.raises(NotFittedError):
        SymbolicRegressor().predict(X)
    with pytest.raises(ValueError):
        SymbolicRegressor(**FAST).fit(X, y[:-1])
    est = SymbolicRegressor(**FAST, random_state=0).fit(X, y)
    with pytest.raises(ValueError):
        est.predict(X[:, :3])
    with pytest.raises(ValueError):
        SymbolicRegressor(population_size=1).fit(X, y)


def test_composes_with_sklearn(data):
    X, y = data
    pipe = make_pipeline(FunctionTransformer(), SymbolicRegressor(**FAST, random_state=1))
    scores = cross_val_score(pipe, X, y, cv=3)
    assert scores.shape == (3,)
