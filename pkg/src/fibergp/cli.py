"""Command-line interface: ``run``, ``published``, ``export-data`` and ``baseline``.

Settings resolve as command-line flag > config file (flat JSON object keyed by
flag name) > built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .dataset import POLICIES, TARGETS, DataError, load_canonical, load_csv, to_resolved, write_csv
from .engine import ConfigError, GPConfig
from .harness import ExperimentPlan, baseline_loocv, run_experiment
from .published import compare_to_tables, get_model
from .reports import comparison_csv, metrics_document, write_experiment, write_json

EXIT_CONFIG = 2
EXIT_IO = 3

DEFAULTS = {
    "target": "uts",
    "out": "results",
    "data": None,
    "seed": 42,
    "repetitions": 10,
    "subset": "paper9",
    "resolve": "midpoint",
    "jobs": 1,
    "linear_scaling": True,
    "baseline": True,
    "population_size": 500,
    "generations": 100,
    "tournament_size": 5,
    "crossover_rate": 0.85,
    "mutation_rate": 0.10,
    "elitism": 1,
    "init_depth_min": 2,
    "init_depth_max": 5,
    "max_depth": 10,
    "erc_low": -10.0,
    "erc_high": 10.0,
    "metric": "rmse",
}

_TYPES = {
    "target": str, "out": str, "data": str, "subset": str, "resolve": str, "metric": str,
    "seed": int, "repetitions": int, "jobs": int, "population_size": int, "generations": int,
    "tournament_size": int, "elitism": int, "init_depth_min": int, "init_depth_max": int,
    "max_depth": int, "crossover_rate": float, "mutation_rate": float, "erc_low": float,
    "erc_high": float, "linear_scaling": bool, "baseline": bool,
}

# GPConfig field -> settings key, for error messages
_FIELD_KEYS = {
    "elitism_count": "elitism", "init_depth": "init_depth_min/init_depth_max",
    "erc_range": "erc_low/erc_high", "fitness_metric": "metric",
}


class SettingsError(Exception):
    pass


def _key(name: str) -> str:
    return name.replace("-", "_")


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SettingsError(f"{path}: cannot read config ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise SettingsError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise SettingsError(f"{path}: config must be a flat JSON object")
    out = {}
    for name, value in raw.items():
        key = _key(name)
        if key == "no_linear_scaling":
            key, value = "linear_scaling", not value if isinstance(value, bool) else value
        if key not in _TYPES:
            raise SettingsError(f"{path}: {name}: unknown key")
        expected = _TYPES[key]
        ok = (
            value is None and key == "data"
            or (expected is float and isinstance(value, (int, float)) and not isinstance(value, bool))
            or (expected is int and isinstance(value, int) and not isinstance(value, bool))
            or (expected in (str, bool) and isinstance(value, expected))
        )
        if not ok:
            raise SettingsError(f"{path}: {name}: expected {expected.__name__}, got {value!r}")
        out[key] = value
    return out


def resolve_settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    settings.update(load_config(getattr(args, "config", None)))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if settings["target"] not in TARGETS:
        raise SettingsError(f"target: must be one of {', '.join(TARGETS)}")
    if settings["resolve"] not in POLICIES:
        raise SettingsError(f"resolve: must be one of {', '.join(POLICIES)}")
    if settings["repetitions"] < 1:
        raise SettingsError("repetitions: must be >= 1")
    if settings["jobs"] == 0:
        raise SettingsError("jobs: must be nonzero")
    return settings


def gp_config_from(settings: dict) -> GPConfig:
    try:
        return GPConfig(
            population_size=settings["population_size"],
            generations=settings["generations"],
            tournament_size=settings["tournament_size"],
            crossover_rate=settings["crossover_rate"],
            mutation_rate=settings["mutation_rate"],
            elitism_count=settings["elitism"],
            init_depth=(settings["init_depth_min"], settings["init_depth_max"]),
            max_depth=settings["max_depth"],
            erc_range=(settings["erc_low"], settings["erc_high"]),
            fitness_metric=settings["metric"],
            linear_scaling=settings["linear_scaling"],
        )
    except ConfigError as exc:
        raise SettingsError(
            "; ".join(f"{_FIELD_KEYS.get(k, k)}: {m}" for k, m in exc.errors)
        ) from None


def _table(settings):
    return load_csv(settings["data"]) if settings.get("data") else load_canonical()


def _plan(settings) -> ExperimentPlan:
    try:
        return ExperimentPlan(
            target=settings["target"],
            subset=settings["subset"],
            resolve_policy=settings["resolve"],
            repetitions=settings["repetitions"],
            base_seed=settings["seed"],
            gp_config=gp_config_from(settings),
            run_baseline=settings["baseline"],
        )
    except ValueError as exc:
        raise SettingsError(str(exc)) from None


def cmd_run(args) -> int:
    settings = resolve_settings(args)
    plan = _plan(settings)
    table = _table(settings)
    try:
        plan.dataset(table)
    except KeyError as exc:
        raise SettingsError(f"subset: {exc.args[0]}") from None
    report = run_experiment(plan, table, n_jobs=settings["jobs"])
    written = write_experiment(report, plan, settings["out"], table)
    doc = metrics_document(report, plan)
    summary = {k: doc[k] for k in ("target", "LR", "best_gp", "average_gp")}
    print(json.dumps(summary, indent=2, sort_keys=True))
    for p in written:
        logging.getLogger(__name__).info("wrote %s", p)
    return 0


def cmd_baseline(args) -> int:
    settings = resolve_settings(args)
    table = _table(settings)
    try:
        data = to_resolved(table, settings["target"], settings["resolve"], settings["subset"])
    except KeyError as exc:
        raise SettingsError(f"subset: {exc.args[0]}") from None
    result = baseline_loocv(data)
    doc = {
        "target": settings["target"],
        "subset": list(data.sample_names),
        "resolve_policy": settings["resolve"],
        "LR": result["metrics"],
        "predictions": dict(zip(data.sample_names, map(float, result["predictions"]))),
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(doc, out / "baseline_metrics.json")
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_published(args) -> int:
    model = get_model(args.target)
    text = comparison_csv(compare_to_tables(model, policy=args.resolve))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_export_data(args) -> int:
    write_csv(load_canonical(), args.path)
    return 0


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--target", choices=TARGETS)
    p.add_argument("--config", help="flat JSON object keyed by flag name")
    p.add_argument("--out", help="output directory")
    p.add_argument("--data", help="fiber table CSV (default: built-in table)")
    p.add_argument("--subset", help="paper9, all, or a comma-separated list of fiber names")
    p.add_argument("--resolve", choices=POLICIES)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fibergp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for progress, -vv for per-generation log lines")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="repeated leave-one-out GP experiment")
    _add_experiment_flags(run)
    run.add_argument("--seed", type=int)
    run.add_argument("--repetitions", type=int)
    run.add_argument("--jobs", type=int, help="parallel fold workers (-1: all cores)")
    run.add_argument("--no-linear-scaling", dest="linear_scaling", action="store_const", const=False)
    run.add_argument("--no-baseline", dest="baseline", action="store_const", const=False)
    run.add_argument("--population-size", type=int)
    run.add_argument("--generations", type=int)
    run.add_argument("--tournament-size", type=int)
    run.add_argument("--crossover-rate", type=float)
    run.add_argument("--mutation-rate", type=float)
    run.add_argument("--elitism", type=int)
    run.add_argument("--max-depth", type=int)
    run.add_argument("--metric", choices=("rmse", "mae"))
    run.set_defaults(func=cmd_run)

    base = sub.add_parser("baseline", help="leave-one-out linear regression baseline")
    _add_experiment_flags(base)
    base.set_defaults(func=cmd_baseline)

    pub = sub.add_parser("published", help="compare a published model with its result table")
    pub.add_argument("--target", required=True, choices=TARGETS)
    pub.add_argument("--resolve", choices=POLICIES, default="midpoint")
    pub.add_argument("--out", help="CSV path (default: stdout)")
    pub.set_defaults(func=cmd_published)

    exp = sub.add_parser("export-data", help="write the built-in fiber table as CSV")
    exp.add_argument("path")
    exp.set_defaults(func=cmd_export_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SettingsError, DataError) as exc:
        print(f"fibergp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"fibergp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
