import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fibergp.expr import (
    ADD,
    DIV,
    EXP,
    LOG,
    MUL,
    SUB,
    ExpressionTree,
    const,
    count_var_refs,
    depth,
    evaluate,
    evaluate_batch,
    parse_infix,
    random_tree,
    size,
    to_infix,
    var,
)
from fibergp.published import elongation_tree, uts_tree

HEMP = [72, 20.15, 4.7, 9.1, 4.1]
finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_evaluate_arithmetic():
    assert evaluate(ADD(0, 1), [2, 3, 0, 0, 0]) == 5
    assert evaluate(DIV(1.0, 0), [0, 0, 0, 0, 0]) == 1.0
    assert evaluate(LOG(0), [0, 1, 1, 1, 1]) == 0.0
    assert evaluate(LOG(0), [-math.e, 1, 1, 1, 1]) == pytest.approx(1.0)
    assert evaluate(EXP(0), [1000, 0, 0, 0, 0]) == math.exp(80)


def test_figure_example_tree():
    # (1.5 - (Y + 2)) + (X / 3) with X, Y as the first two inputs
    t = ADD(SUB(1.5, ADD(1, 2.0)), DIV(0, 3.0))
    assert evaluate(t, [6, 1, 0, 0, 0]) == pytest.approx(0.5)


def test_uts_tree_at_hemp_matches_desk_oracle():
    oracle = (math.log(1.378 * 20.15) * (0.94995 * 4.1 - 0.78676 * 72) - 1.8922 * 4.1) * -6.3671 - 363.56
    assert oracle == pytest.approx(802.2359183232338, rel=1e-15)
    assert evaluate(uts_tree(), HEMP) == pytest.approx(oracle, rel=1e-12)


def test_overflow_is_clamped():
    x = [1e200, 0, 0, 0, 0]
    assert evaluate(MUL(0, 0), x) == 1e15
    assert evaluate(SUB(0.0, MUL(0, 0)), x) == -1e15
    # only non-finite values are clamped
    assert evaluate(MUL(MUL(0, 0), MUL(0, 0)), x) == 1e30
    assert evaluate_batch(MUL(MUL(0, 0), MUL(0, 0)), [x])[0] == 1e30


def test_size_and_depth():
    assert (size(const(2.0)), depth(const(2.0))) == (1, 1)
    assert (size(ADD(0, 1)), depth(ADD(0, 1))) == (3, 2)
    # ((c0*H + (c1*Mc)/(c2*H)) * c3 + c4) counted by hand
    assert (size(elongation_tree()), depth(elongation_tree())) == (15, 6)


def test_count_var_refs():
    assert count_var_refs(MUL(ADD(0, 0), 1)) == {0: 2, 1: 1, 2: 0, 3: 0, 4: 0}
    assert count_var_refs(uts_tree()) == {0: 1, 1: 1, 2: 0, 3: 0, 4: 2}
    assert count_var_refs(ADD(1.0, 2.0)) == dict.fromkeys(range(5), 0)


def test_to_infix():
    assert to_infix(ADD(0, 1)) == "(C + H)"
    assert to_infix(MUL(1.378, 1)) == "(1.378 * H)"
    assert to_infix(LOG(SUB(3, -2.5))) == "log((Mc - -2.5))"


def test_tree_validation():
    with pytest.raises(ValueError):
        ExpressionTree([ADD, 0])
    with pytest.raises(ValueError):
        ExpressionTree([0, 1])
    with pytest.raises(ValueError):
        var(5)
    with pytest.raises(ValueError):
        const(float("inf"))


def test_variable_and_constant_of_equal_value_differ():
    assert var(1) != const(1.0)


def test_random_tree_depth_one_is_leaf():
    rng = np.random.default_rng(0)
    for method in ("grow", "full"):
        assert random_tree(1, method, rng).size == 1


def test_random_tree_full_leaves_all_at_limit():
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = random_tree(3, "full", rng)
        assert t.depth == 3
        # every leaf at depth 3: walk prefix with a depth stack
        pending = [1]
        for node in t.nodes:
            d = pending.pop()
            arity = getattr(node, "arity", 0)
            if arity == 0:
                assert d == 3
            pending.extend([d + 1] * arity)


def test_random_tree_determinism():
    a = random_tree(5, "grow", np.random.default_rng(11))
    b = random_tree(5, "grow", np.random.default_rng(11))
    assert a == b and a.nodes == b.nodes


@given(st.integers(1, 7), st.sampled_from(["grow", "full"]), st.integers(0, 2**32))
def test_random_tree_depth_bounds(d, method, seed):
    t = random_tree(d, method, np.random.default_rng(seed))
    if method == "full":
        assert t.depth == d
    else:
        assert 1 <= t.depth <= d


@settings(max_examples=200)
@given(st.integers(0, 2**32), st.lists(finite, min_size=5, max_size=5))
def test_evaluate_total_and_batch_agrees(seed, x):
    t = random_tree(6, "grow", np.random.default_rng(seed))
    v = evaluate(t, x)
    assert math.isfinite(v)
    b = evaluate_batch(t, np.array([x]))[0]
    assert b == pytest.approx(v, rel=1e-12, abs=1e-12)


@given(finite, finite.filter(lambda b: abs(b) >= 1e-9))
def test_protected_division_matches_true_division(a, b):
    t = DIV(0, 1)
    assert evaluate(t, [a, b, 0, 0, 0]) == pytest.approx(a / b, rel=1e-12)


@given(st.integers(0, 2**32))
def test_ref_counts_total_equals_variable_leaves(seed):
    t = random_tree(6, "grow", np.random.default_rng(seed))
    n_vars = sum(1 for n in t.nodes if type(n) is int)
    assert sum(count_var_refs(t).values()) == n_vars


@given(st.integers(0, 2**32))
def test_infix_round_trip(seed):
    t = random_tree(6, "full", np.random.default_rng(seed))
    assert parse_infix(to_infix(t)) == t


def test_parse_infix_errors():
    with pytest.raises(ValueError):
        parse_infix("(C + )")
    with pytest.raises(ValueError):
        parse_infix("(C ^ H)")
    with pytest.raises(ValueError):
        parse_infix("sin(C)")
