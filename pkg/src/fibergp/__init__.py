"""Symbolic-regression genetic programming for natural-fiber mechanical properties."""

from .baseline import OLSRegressor, ols_fit, ols_predict
from .dataset import FiberRecord, FiberTable, RangeValue, load_canonical, load_csv, to_resolved
from .engine import GPConfig, Individual, RunResult, run
from .expr import ExpressionTree, evaluate, parse_infix, to_infix
from .harness import ExperimentPlan, run_experiment
from .impact import ImpactAccumulator
from .metrics import mae, r2_paper, r2_standard, rmse
from .regressor import SymbolicRegressor

__version__ = "0.1.0"
