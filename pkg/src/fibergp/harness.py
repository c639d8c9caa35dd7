"""Leave-one-out cross-validation protocol with repeated independent GP passes."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import LeaveOneOut, cross_val_predict

from .baseline import OLSRegressor
from .dataset import FiberTable, ResolvedDataset, format_range, load_canonical, to_resolved
from .engine import GPConfig, Individual
from .impact import ImpactAccumulator
from .metrics import metrics_report
from .regressor import SymbolicRegressor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentPlan:
    target: str
    subset: object = "paper9"
    resolve_policy: str = "midpoint"
    repetitions: int = 10
    base_seed: int = 0
    gp_config: GPConfig = field(default_factory=GPConfig)
    run_baseline: bool = True

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0 <= int(self.base_seed) < 2**64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")

    def dataset(self, table: FiberTable | None = None) -> ResolvedDataset:
        return to_resolved(table or load_canonical(), self.target, self.resolve_policy, self.subset)


@dataclass
class RepetitionResult:
    repetition: int
    predictions: np.ndarray  # held-out prediction per sample, sample order
    fold_models: list[Individual]
    fold_seeds: list[int]
    metrics: dict[str, float]
    impact: ImpactAccumulator


@dataclass
class CVReport:
    target: str
    sample_names: tuple[str, ...]
    actual: np.ndarray
    repetitions: list[RepetitionResult]
    best_repetition_index: int
    average: dict[str, float]
    baseline: dict | None = None

    @property
    def best(self) -> RepetitionResult:
        return self.repetitions[self.best_repetition_index]

    @property
    def impact(self) -> ImpactAccumulator:
        """Impact of the best repetition's folds."""
        return self.best.impact


def fold_seed(base_seed: int, repetition: int, fold: int) -> int:
    """Mix ``(base_seed, repetition, fold)`` into a 64-bit run seed via ``SeedSequence``."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(repetition), int(fold)))
    return int(ss.generate_state(1, np.uint64)[0])


def loocv_splits(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """The fold splits shared by GP and the baseline."""
    if n < 2:
        raise ValueError("leave-one-out needs at least 2 instances")
    return list(LeaveOneOut().split(np.zeros((n, 1))))


def _gp_params(config: GPConfig) -> dict:
    return dict(
        population_size=config.population_size,
        generations=config.generations,
        tournament_size=config.tournament_size,
        crossover_rate=config.crossover_rate,
        mutation_rate=config.mutation_rate,
        elitism=config.elitism_count,
        init_depth=config.init_depth,
        max_depth=config.max_depth,
        erc_range=config.erc_range,
        metric=config.fitness_metric,
        linear_scaling=config.linear_scaling,
    )


def _fit_fold(X, y, train, test, params, seed):
    assert not np.isin(test, train).any(), "held-out instance leaked into training"
    est = SymbolicRegressor(**params, random_state=seed).fit(X[train], y[train])
    pred = float(est.predict(X[test])[0])
    return pred, est.best_, est.run_result_.impact


def _assemble(rep: int, n: int, y, fold_results, seeds) -> RepetitionResult:
    preds = np.array([r[0] for r in fold_results])
    return RepetitionResult(
        repetition=rep,
        predictions=preds,
        fold_models=[r[1] for r in fold_results],
        fold_seeds=list(seeds),
        metrics=metrics_report(y, preds),
        impact=ImpactAccumulator.merge(r[2] for r in fold_results),
    )


def loocv_once(
    plan: ExperimentPlan, repetition: int, data: ResolvedDataset | None = None, n_jobs: int = 1
) -> RepetitionResult:
    """One full leave-one-out pass; fold ``j`` is seeded from ``(base_seed, repetition, j)``."""
    data = data if data is not None else plan.dataset()
    X, y = data.X, data.y
    splits = loocv_splits(len(y))
    params = _gp_params(plan.gp_config)
    seeds = [fold_seed(plan.base_seed, repetition, j) for j in range(len(splits))]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_fit_fold)(X, y, tr, te, params, s) for (tr, te), s in zip(splits, seeds)
    )
    return _assemble(repetition, len(y), y, results, seeds)


def baseline_loocv(data: ResolvedDataset) -> dict:
    """OLS predictions over the same leave-one-out folds as GP."""
    preds = cross_val_predict(OLSRegressor(), data.X, data.y, cv=loocv_splits(len(data.y)))
    return {"predictions": preds, "metrics": metrics_report(data.y, preds)}


def run_experiment(
    plan: ExperimentPlan, table: FiberTable | None = None, n_jobs: int = 1
) -> CVReport:
    data = plan.dataset(table)
    X, y = data.X, data.y
    splits = loocv_splits(len(y))
    params = _gp_params(plan.gp_config)
    tasks = [
        (rep, j, fold_seed(plan.base_seed, rep, j))
        for rep in range(plan.repetitions)
        for j in range(len(splits))
    ]
    logger.info("%s: %d repetitions x %d folds", plan.target, plan.repetitions, len(splits))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_fit_fold)(X, y, *splits[j], params, seed) for _, j, seed in tasks
    )
    reps = []
    for rep in range(plan.repetitions):
        k = rep * len(splits)
        seeds = [t[2] for t in tasks[k:k + len(splits)]]
        reps.append(_assemble(rep, len(y), y, results[k:k + len(splits)], seeds))

    best = min(range(len(reps)), key=lambda i: (reps[i].metrics["rmse"], i))
    average = {
        key: float(np.mean([r.metrics[key] for r in reps])) for key in reps[0].metrics
    }
    return CVReport(
        target=plan.target,
        sample_names=data.sample_names,
        actual=y,
        repetitions=reps,
        best_repetition_index=best,
        average=average,
        baseline=baseline_loocv(data) if plan.run_baseline else None,
    )


def best_predictions_table(report: CVReport, table: FiberTable | None = None) -> list[dict]:
    """Per-fiber ``range``, ``actual`` and held-out ``estimated`` of the best repetition."""
    table = table or load_canonical()
    best = report.best
    return [
        {
            "fiber": name,
            "range": format_range(getattr(table[name], report.target)),
            "actual": float(actual),
            "estimated": float(est),
        }
        for name, actual, est in zip(report.sample_names, report.actual, best.predictions)
    ]
