import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fibergp.engine import (
    ConfigError,
    GPConfig,
    Individual,
    fitness,
    initialize,
    run,
    subtree_crossover,
    subtree_mutate,
    tournament_select,
)
from fibergp.expr import ADD, MUL, const, evaluate, random_tree, var

SMALL = dict(population_size=40, generations=10, init_depth=(2, 4), max_depth=6)


@pytest.fixture
def toy():
    rng = np.random.default_rng(5)
    X = rng.uniform(1, 10, (12, 5))
    y = 3 * X[:, 0] + X[:, 1] * X[:, 2]
    return X, y


def _brute_fitness(tree, X, y, metric, scaling):
    p = [evaluate(tree, row) for row in X]
    n = len(y)
    a, b = 1.0, 0.0
    if scaling:
        pm, ym = sum(p) / n, sum(y) / n
        var_p = sum((v - pm) ** 2 for v in p) / n
        if var_p < 1e-12:
            a, b = 0.0, ym
        else:
            a = sum((v - pm) * (w - ym) for v, w in zip(p, y)) / n / var_p
            b = ym - a * pm
    errs = [w - (a * v + b) for v, w in zip(p, y)]
    if metric == "rmse":
        return math.sqrt(sum(e * e for e in errs) / n)
    return sum(abs(e) for e in errs) / n


def test_config_validation():
    GPConfig()
    with pytest.raises(ConfigError, match="population_size"):
        GPConfig(population_size=1)
    with pytest.raises(ConfigError, match="must not exceed 1"):
        GPConfig(crossover_rate=0.9, mutation_rate=0.2)
    with pytest.raises(ConfigError, match="max_depth"):
        GPConfig(init_depth=(2, 6), max_depth=5)
    with pytest.raises(ConfigError, match="elitism_count"):
        GPConfig(population_size=4, elitism_count=4)
    assert GPConfig().reproduction_rate == pytest.approx(0.05)


def test_initialize():
    cfg = GPConfig(population_size=10, init_depth=(2, 4))
    pop = initialize(cfg, np.random.default_rng(0))
    assert len(pop) == 10
    assert all(1 <= ind.tree.depth <= 4 for ind in pop)
    # the full-method members hit their ramp depth exactly
    assert [pop[i].tree.depth for i in (0, 1, 2)] == [2, 3, 4]
    again = initialize(cfg, np.random.default_rng(0))
    assert [i.tree for i in pop] == [i.tree for i in again]
    leaves = initialize(GPConfig(population_size=6, init_depth=(1, 1), max_depth=1),
                        np.random.default_rng(0))
    assert all(ind.tree.size == 1 for ind in leaves)


def test_tournament_full_size_frequency():
    n = k = 10
    pop = [Individual(const(float(i)), fitness=float(i)) for i in range(n)]
    rng = np.random.default_rng(0)
    draws = 4000
    hits = sum(tournament_select(pop, k, rng) is pop[0] for _ in range(draws))
    expected = 1 - (1 - 1 / n) ** k
    sigma = math.sqrt(expected * (1 - expected) / draws)
    assert abs(hits / draws - expected) < 4 * sigma


def test_tournament_k1_is_uniform():
    pop = [Individual(const(float(i)), fitness=float(i)) for i in range(5)]
    rng = np.random.default_rng(1)
    counts = np.zeros(5)
    for _ in range(5000):
        counts[int(tournament_select(pop, 1, rng).fitness)] += 1
    assert np.all(np.abs(counts / 5000 - 0.2) < 0.03)


def test_tournament_tie_breaks_by_size_then_index():
    big = Individual(ADD(0, 1), fitness=1.0)
    small = Individual(var(0), fitness=1.0)
    rng = np.random.default_rng(0)
    for _ in range(50):
        picked = tournament_select([big, small], 20, rng)
        assert picked is small
    twins = [Individual(var(0), fitness=1.0), Individual(var(1), fitness=1.0)]
    assert tournament_select(twins, 50, rng) is twins[0]


def test_crossover_of_leaves_swaps_them():
    a, b = Individual(var(0)), Individual(const(2.0))
    c1, c2 = subtree_crossover(a, b, np.random.default_rng(0), max_depth=5)
    assert c1.tree == b.tree and c2.tree == a.tree


def test_crossover_determinism():
    rng = np.random.default_rng(9)
    a = Individual(random_tree(4, "full", rng))
    b = Individual(random_tree(4, "full", rng))
    r1 = subtree_crossover(a, b, np.random.default_rng(1), 8)
    r2 = subtree_crossover(a, b, np.random.default_rng(1), 8)
    assert [c.tree for c in r1] == [c.tree for c in r2]


@settings(max_examples=100)
@given(st.integers(0, 2**32))
def test_offspring_respect_max_depth(seed):
    rng = np.random.default_rng(seed)
    cfg = GPConfig(init_depth=(2, 5), max_depth=6)
    a = Individual(random_tree(6, "full", rng))
    b = Individual(random_tree(6, "grow", rng))
    for child in subtree_crossover(a, b, rng, cfg.max_depth):
        assert child.tree.depth <= cfg.max_depth
    assert subtree_mutate(a, cfg, rng).tree.depth <= cfg.max_depth


def test_mutation():
    cfg = GPConfig(init_depth=(2, 4), max_depth=8)
    leaf = Individual(var(0))
    child = subtree_mutate(leaf, cfg, np.random.default_rng(4))
    assert child.tree.depth <= 4
    rng = np.random.default_rng(2)
    parent = Individual(random_tree(4, "full", rng))
    m1 = subtree_mutate(parent, cfg, np.random.default_rng(3))
    m2 = subtree_mutate(parent, cfg, np.random.default_rng(3))
    assert m1.tree == m2.tree


def test_fitness_exact_formula(toy):
    X, y = toy
    t = ADD(MUL(3.0, 0), MUL(1, 2))
    score, scale = fitness(t, X, y, "rmse", linear_scaling=False)
    assert score == pytest.approx(0, abs=1e-12) and scale is None


def test_fitness_constant_tree_with_scaling(toy):
    X, y = toy
    score, (a, b) = fitness(const(4.2), X, y, "rmse", True)
    assert a == 0 and b == pytest.approx(y.mean())
    assert score == pytest.approx(np.sqrt(np.mean((y - y.mean()) ** 2)))


@pytest.mark.parametrize("metric", ["rmse", "mae"])
@pytest.mark.parametrize("scaling", [True, False])
def test_fitness_matches_brute_force(toy, metric, scaling):
    X, y = toy
    rng = np.random.default_rng(17)
    for _ in range(100):
        t = random_tree(5, "grow", rng)
        score, _ = fitness(t, X, y, metric, scaling)
        expected = _brute_fitness(t, X, y, metric, scaling)
        assert score == pytest.approx(expected, rel=1e-12, abs=1e-9)


def test_generation_zero_returns_best_initial(toy):
    X, y = toy
    res = run(GPConfig(**{**SMALL, "generations": 0}, seed=3), X, y)
    assert res.history.shape == (1, 2)
    assert res.best.fitness == res.history[0, 0]
    assert res.evaluations == SMALL["population_size"]
    assert res.impact.populations_seen == 1


def test_run_invariants(toy):
    X, y = toy
    seen = []

    def check(g, pop):
        seen.append(g)
        assert len(pop) == SMALL["population_size"]
        assert all(ind.tree.depth <= SMALL["max_depth"] for ind in pop)
        assert all(np.isfinite(ind.fitness) for ind in pop)

    cfg = GPConfig(**SMALL, elitism_count=2, seed=8)
    res = run(cfg, X, y, callback=check)
    assert seen == list(range(cfg.generations + 1))
    assert res.history.shape == (cfg.generations + 1, 2)
    assert np.all(np.diff(res.history[:, 0]) <= 0)
    assert res.best.fitness == res.history[:, 0].min()
    assert res.evaluations == cfg.population_size * (cfg.generations + 1) - cfg.elitism_count * cfg.generations
    assert res.impact.populations_seen == cfg.generations + 1


def test_run_determinism(toy):
    X, y = toy
    cfg = GPConfig(**SMALL, seed=123)
    a, b = run(cfg, X, y), run(cfg, X, y)
    assert a.best.tree == b.best.tree
    assert a.history.tobytes() == b.history.tobytes()
    np.testing.assert_array_equal(a.impact.freq, b.impact.freq)


def test_run_finds_simple_relation():
    X = np.random.default_rng(0).uniform(1, 5, (15, 5))
    y = 2 * X[:, 3] - 1
    res = run(GPConfig(population_size=100, generations=10, seed=1), X, y)
    assert res.best.fitness < 1e-6
    np.testing.assert_allclose(res.best.predict(X), y, atol=1e-6)
