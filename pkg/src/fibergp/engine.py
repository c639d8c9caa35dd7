"""Generational tree GP: ramped half-and-half init, tournament selection,
subtree crossover/mutation, elitism and optional linear output scaling."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import _kernels as K
from .expr import ADD, MUL, N_FEATURES, ExpressionTree, evaluate_batch, random_tree
from .impact import ImpactAccumulator

logger = logging.getLogger(__name__)

METRICS = {"rmse": K.METRIC_RMSE, "mae": K.METRIC_MAE}
INTERNAL_POINT_BIAS = 0.9


@dataclass(frozen=True)
class GPConfig:
    population_size: int = 500
    generations: int = 100
    tournament_size: int = 5
    crossover_rate: float = 0.85
    mutation_rate: float = 0.10
    elitism_count: int = 1
    init_depth: tuple[int, int] = (2, 5)
    max_depth: int = 10
    erc_range: tuple[float, float] = (-10.0, 10.0)
    fitness_metric: str = "rmse"
    linear_scaling: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "init_depth", tuple(int(d) for d in self.init_depth))
        object.__setattr__(self, "erc_range", tuple(float(v) for v in self.erc_range))
        errors = []
        if self.population_size < 2:
            errors.append(("population_size", "must be >= 2"))
        if self.generations < 0:
            errors.append(("generations", "must be >= 0"))
        if self.tournament_size < 1:
            errors.append(("tournament_size", "must be >= 1"))
        for name in ("crossover_rate", "mutation_rate"):
            if not 0 <= getattr(self, name) <= 1:
                errors.append((name, "must lie in [0, 1]"))
        if self.crossover_rate + self.mutation_rate > 1 + 1e-12:
            errors.append(("mutation_rate", "crossover_rate + mutation_rate must not exceed 1"))
        if not 0 <= self.elitism_count < self.population_size:
            errors.append(("elitism_count", "must lie in [0, population_size)"))
        lo, hi = self.init_depth
        if not 1 <= lo <= hi:
            errors.append(("init_depth", "need 1 <= min <= max"))
        if self.max_depth < hi:
            errors.append(("max_depth", "must be >= init_depth max"))
        if not self.erc_range[0] < self.erc_range[1]:
            errors.append(("erc_range", "need low < high"))
        if self.fitness_metric not in METRICS:
            errors.append(("fitness_metric", f"must be one of {sorted(METRICS)}"))
        if not 0 <= int(self.seed) < 2**64:
            errors.append(("seed", "must be an unsigned 64-bit integer"))
        if errors:
            raise ConfigError(errors)

    @property
    def reproduction_rate(self) -> float:
        return max(0.0, 1.0 - self.crossover_rate - self.mutation_rate)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init_depth"] = list(self.init_depth)
        d["erc_range"] = list(self.erc_range)
        return d


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` holds ``(key, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{k}: {m}" for k, m in self.errors))


@dataclass(slots=True)
class Individual:
    tree: ExpressionTree
    fitness: float = float("nan")
    scale: tuple[float, float] | None = None

    def copy(self) -> "Individual":
        # trees are immutable, sharing is safe
        return Individual(self.tree, self.fitness, self.scale)

    def predict(self, X) -> np.ndarray:
        p = evaluate_batch(self.tree, X)
        if self.scale is None:
            return p
        a, b = self.scale
        return a * p + b

    def scaled_tree(self) -> ExpressionTree:
        """The model as one tree, the affine output map folded in as ``(t * a) + b``."""
        if self.scale is None:
            return self.tree
        a, b = self.scale
        return ADD(MUL(self.tree, a), b)


@dataclass
class RunResult:
    best: Individual
    history: np.ndarray  # (generations + 1, 2): best and mean fitness
    impact: ImpactAccumulator
    evaluations: int
    config: GPConfig = field(repr=False, default=None)


def _rank_key(pop: list[Individual]):
    return lambda i: (pop[i].fitness, pop[i].tree.size, i)


def initialize(config: GPConfig, rng: np.random.Generator, n_features: int = N_FEATURES) -> list[Individual]:
    """Ramped half-and-half: depths cycle over the init range, full and grow alternate."""
    lo, hi = config.init_depth
    depths = list(range(lo, hi + 1))
    pop = []
    for i in range(config.population_size):
        d = depths[i % len(depths)]
        method = "full" if (i // len(depths)) % 2 == 0 else "grow"
        pop.append(Individual(random_tree(d, method, rng, n_features, config.erc_range)))
    return pop


def tournament_select(population: list[Individual], k: int, rng: np.random.Generator) -> Individual:
    """Best of ``k`` uniform draws with replacement; ties go to the smaller tree,
    then the earlier index."""
    picks = rng.integers(len(population), size=k)
    return population[min(picks.tolist(), key=_rank_key(population))]


def _crossover_point(tree: ExpressionTree, rng: np.random.Generator) -> int:
    codes = tree.codes
    internal = np.flatnonzero(codes < K.CONST)
    leaves = np.flatnonzero(codes >= K.CONST)
    if len(internal) and rng.random() < INTERNAL_POINT_BIAS:
        return int(internal[rng.integers(len(internal))])
    return int(leaves[rng.integers(len(leaves))])


def _splice(host: ExpressionTree, span: tuple[int, int], donor_nodes: tuple) -> ExpressionTree:
    s, e = span
    return ExpressionTree._trusted(host.nodes[:s] + donor_nodes + host.nodes[e:])


def subtree_crossover(
    a: Individual, b: Individual, rng: np.random.Generator, max_depth: int
) -> tuple[Individual, Individual]:
    sa = a.tree.subtree_span(_crossover_point(a.tree, rng))
    sb = b.tree.subtree_span(_crossover_point(b.tree, rng))
    c1 = _splice(a.tree, sa, b.tree.nodes[sb[0]:sb[1]])
    c2 = _splice(b.tree, sb, a.tree.nodes[sa[0]:sa[1]])
    child1 = Individual(c1) if c1.depth <= max_depth else a.copy()
    child2 = Individual(c2) if c2.depth <= max_depth else b.copy()
    return child1, child2


def subtree_mutate(
    a: Individual, config: GPConfig, rng: np.random.Generator, n_features: int = N_FEATURES
) -> Individual:
    point = int(rng.integers(a.tree.size))
    span = a.tree.subtree_span(point)
    fresh = random_tree(config.init_depth[1], "grow", rng, n_features, config.erc_range)
    child = _splice(a.tree, span, fresh.nodes)
    return Individual(child) if child.depth <= config.max_depth else a.copy()


def fitness(
    tree: ExpressionTree, X, y, metric: str = "rmse", linear_scaling: bool = True
) -> tuple[float, tuple[float, float] | None]:
    """Score a tree; returns ``(score, (a, b))`` with scaling on, ``(score, None)`` off."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    score, a, b = K.score_program(tree.codes, tree.consts, X, y, METRICS[metric], linear_scaling)
    return float(score), ((float(a), float(b)) if linear_scaling else None)


def _evaluate(ind: Individual, X, y, metric_code: int, scaling: bool) -> None:
    score, a, b = K.score_program(ind.tree.codes, ind.tree.consts, X, y, metric_code, scaling)
    ind.fitness = float(score)
    ind.scale = (float(a), float(b)) if scaling else None


def run(
    config: GPConfig,
    X,
    y,
    callback: Callable[[int, list[Individual]], None] | None = None,
) -> RunResult:
    """Evolve a model of ``y`` from ``X``.

    ``callback(generation, population)`` is invoked after each population is
    scored, the initial one included.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or len(y) == 0:
        raise ValueError("X must be (n, d) and y of length n >= 1")
    n_features = X.shape[1]
    metric_code = METRICS[config.fitness_metric]
    scaling = bool(config.linear_scaling)
    rng = np.random.default_rng(int(config.seed))
    impact = ImpactAccumulator(n_features)

    pop = initialize(config, rng, n_features)
    for ind in pop:
        _evaluate(ind, X, y, metric_code, scaling)
    evaluations = len(pop)
    history = []
    best = None

    def record(g, pop):
        nonlocal best
        impact.accumulate(pop)
        fits = np.array([ind.fitness for ind in pop])
        leader = pop[min(range(len(pop)), key=_rank_key(pop))]
        if best is None or leader.fitness < best.fitness:
            best = leader.copy()
        history.append((fits.min(), fits.mean()))
        logger.debug("gen %d best %.6g mean %.6g", g, fits.min(), fits.mean())
        if callback is not None:
            callback(g, pop)

    record(0, pop)
    cx = config.crossover_rate
    mut = cx + config.mutation_rate
    for g in range(1, config.generations + 1):
        order = sorted(range(len(pop)), key=_rank_key(pop))
        nxt = [pop[i].copy() for i in order[: config.elitism_count]]
        fresh = []
        while len(nxt) + len(fresh) < config.population_size:
            r = rng.random()
            if r < cx:
                p1 = tournament_select(pop, config.tournament_size, rng)
                p2 = tournament_select(pop, config.tournament_size, rng)
                c1, c2 = subtree_crossover(p1, p2, rng, config.max_depth)
                fresh.append(c1)
                if len(nxt) + len(fresh) < config.population_size:
                    fresh.append(c2)
            elif r < mut:
                parent = tournament_select(pop, config.tournament_size, rng)
                fresh.append(subtree_mutate(parent, config, rng, n_features))
            else:
                fresh.append(tournament_select(pop, config.tournament_size, rng).copy())
        for ind in fresh:
            _evaluate(ind, X, y, metric_code, scaling)
        evaluations += len(fresh)
        pop = nxt + fresh
        record(g, pop)

    return RunResult(best, np.array(history), impact, evaluations, config)
