"""The three published evolved models, with their printed constants and estimates.

Each model exists twice: as a closed-form function and as an expression tree.
Both follow the protected semantics of :mod:`fibergp.expr`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dataset import PAPER9, FiberTable, load_canonical, resolve
from .expr import (
    ADD,
    DIV,
    EXP,
    LOG,
    MUL,
    SUB,
    ExpressionTree,
    clamp_overflow as _c,
    evaluate_batch,
    protected_div,
    protected_exp,
    protected_log,
    var,
)

C, H, L, MC, MA = (var(i) for i in range(5))

UTS_CONSTANTS = {"c0": "1.378", "c1": "0.94995", "c2": "0.78676", "c3": "1.8922",
                 "c4": "-6.3671", "c5": "-363.56"}
ELONGATION_CONSTANTS = {"c0": "1.1682", "c1": "0.19393", "c2": "-0.024258",
                        "c3": "-0.073047", "c4": "4.3192"}
YOUNGS_CONSTANTS = {"c0": "-0.52777", "c1": "2.9897", "c2": "3.1136",
                    "c3": "3.989E+05", "c4": "12.823"}


def _floats(printed: dict[str, str]) -> dict[str, float]:
    return {k: float(v) for k, v in printed.items()}


_U = _floats(UTS_CONSTANTS)
_EL = _floats(ELONGATION_CONSTANTS)
_Y = _floats(YOUNGS_CONSTANTS)


def eval_uts(x) -> float:
    """((log(c0*H) * (c1*Ma - c2*C) - c3*Ma) * c4 + c5), MPa."""
    c, h, _, _, ma = (float(v) for v in x)
    k = _U
    log_term = _c(protected_log(_c(k["c0"] * h)))
    diff = _c(_c(k["c1"] * ma) - _c(k["c2"] * c))
    inner = _c(_c(log_term * diff) - _c(k["c3"] * ma))
    return _c(_c(inner * k["c4"]) + k["c5"])


def eval_elongation(x) -> float:
    """((c0*H + (c1*Mc)/(c2*H)) * c3 + c4), percent."""
    _, h, _, mc, _ = (float(v) for v in x)
    k = _EL
    ratio = _c(protected_div(_c(k["c1"] * mc), _c(k["c2"] * h)))
    inner = _c(_c(k["c0"] * h) + ratio)
    return _c(_c(inner * k["c3"]) + k["c4"])


def eval_youngs(x) -> float:
    """(exp(c0*Ma) / ((c1*L) * (c2*H)) * c3 + c4), GPa."""
    _, h, l, _, ma = (float(v) for v in x)
    k = _Y
    num = _c(protected_exp(_c(k["c0"] * ma)))
    den = _c(_c(k["c1"] * l) * _c(k["c2"] * h))
    return _c(_c(_c(protected_div(num, den)) * k["c3"]) + k["c4"])


def uts_tree() -> ExpressionTree:
    k = _U
    inner = SUB(MUL(LOG(MUL(k["c0"], H)), SUB(MUL(k["c1"], MA), MUL(k["c2"], C))), MUL(k["c3"], MA))
    return ADD(MUL(inner, k["c4"]), k["c5"])


def elongation_tree() -> ExpressionTree:
    k = _EL
    inner = ADD(MUL(k["c0"], H), DIV(MUL(k["c1"], MC), MUL(k["c2"], H)))
    return ADD(MUL(inner, k["c3"]), k["c4"])


def youngs_tree() -> ExpressionTree:
    k = _Y
    ratio = DIV(EXP(MUL(k["c0"], MA)), MUL(MUL(k["c1"], L), MUL(k["c2"], H)))
    return ADD(MUL(ratio, k["c3"]), k["c4"])


# Printed estimates of the best leave-one-out experiment, kept as printed.
_ESTIMATES = {
    "uts": ("628.1", "725.1", "670.2", "675.7", "555.0", "622.9", "337.9", "467.3", "99.4"),
    "elongation": ("1.34", "1.95", "3.04", "0.40", "4.60", "5.73", "0.88", "3.02", "30.34"),
    "youngs_modulus": ("35.43", "41.12", "14.86", "26.92", "12.65", "12.88", "13.67", "25.69", "21.14"),
}


@dataclass(frozen=True)
class PublishedModel:
    target: str
    tree: ExpressionTree
    constants: dict[str, str]
    evaluator: Callable[[object], float]
    paper_estimates: dict[str, str]

    def __call__(self, x) -> float:
        return self.evaluator(x)

    def predict(self, X) -> np.ndarray:
        return np.array([self.evaluator(row) for row in np.atleast_2d(X)])

    def predict_tree(self, X) -> np.ndarray:
        return evaluate_batch(self.tree, X)


def _model(target, tree_fn, constants, evaluator) -> PublishedModel:
    return PublishedModel(target, tree_fn(), constants, evaluator,
                          dict(zip(PAPER9, _ESTIMATES[target])))


MODELS = {
    "uts": _model("uts", uts_tree, UTS_CONSTANTS, eval_uts),
    "elongation": _model("elongation", elongation_tree, ELONGATION_CONSTANTS, eval_elongation),
    "youngs_modulus": _model("youngs_modulus", youngs_tree, YOUNGS_CONSTANTS, eval_youngs),
}


def get_model(target: str) -> PublishedModel:
    try:
        return MODELS[target]
    except KeyError:
        raise ValueError(f"unknown target {target!r}; expected one of {sorted(MODELS)}") from None


def compare_to_tables(
    model: PublishedModel, table: FiberTable | None = None, policy: str = "midpoint"
) -> list[dict]:
    """Rows of actual, printed estimate, computed value and deviations per fiber."""
    table = table or load_canonical()
    rows = []
    for name in table.names:
        if name not in model.paper_estimates:
            continue
        rec = table[name]
        printed = model.paper_estimates[name]
        computed = model(rec.features(policy))
        abs_dev = abs(computed - float(printed))
        rows.append({
            "fiber": name,
            "actual": resolve(getattr(rec, model.target), policy),
            "paper_estimate": printed,
            "computed": computed,
            "abs_dev": abs_dev,
            "rel_dev": abs_dev / abs(float(printed)),
        })
    return rows
