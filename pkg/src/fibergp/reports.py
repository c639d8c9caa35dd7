"""Artifact writers: CSV and JSON reports plus plot-data files."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .dataset import FEATURE_SYMBOLS, load_canonical
from .expr import to_infix
from .harness import CVReport, ExperimentPlan, best_predictions_table
from .impact import ImpactAccumulator, impact_rows

PREDICTIONS_HEADER = ("fiber", "actual", "estimated", "repetition", "fold")
IMPACT_HEADER = ("variable", "frequency", "relative_impact")
COMPARISON_HEADER = ("fiber", "actual", "paper_estimate", "computed", "abs_dev", "rel_dev")
SCATTER_HEADER = ("fiber", "range", "actual", "estimated")


def _num(v):
    return repr(float(v))


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _metrics_block(m: dict) -> dict:
    return {k: _json_safe(float(m[k])) for k in ("rmse", "mae", "r2_paper", "r2_standard")}


def write_predictions_csv(report: CVReport, path) -> None:
    rows = []
    for rep in report.repetitions:
        for fold, (name, actual, est) in enumerate(
            zip(report.sample_names, report.actual, rep.predictions)
        ):
            rows.append((name, _num(actual), _num(est), rep.repetition, fold))
    _write_rows(path, PREDICTIONS_HEADER, rows)


def metrics_document(report: CVReport, plan: ExperimentPlan) -> dict:
    best = report.best
    return {
        "target": report.target,
        "subset": list(report.sample_names),
        "resolve_policy": plan.resolve_policy,
        "repetitions": plan.repetitions,
        "base_seed": int(plan.base_seed),
        "gp_config": {k: v for k, v in plan.gp_config.to_dict().items() if k != "seed"},
        "LR": _metrics_block(report.baseline["metrics"]) if report.baseline else None,
        "best_gp": {**_metrics_block(best.metrics), "repetition": best.repetition},
        "average_gp": _metrics_block(report.average),
        "per_repetition": [_metrics_block(r.metrics) for r in report.repetitions],
        "relative_impact": dict(zip(FEATURE_SYMBOLS, map(float, report.impact.relative()))),
    }


def write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_impact_csv(acc: ImpactAccumulator, path) -> None:
    rows = [(n, f, _num(r)) for n, f, r in impact_rows(acc)]
    _write_rows(path, IMPACT_HEADER, rows)


def write_impact_curve_csv(acc: ImpactAccumulator, path) -> None:
    curve = acc.relative_by_population()
    rows = [(g, *map(_num, row)) for g, row in enumerate(curve)]
    _write_rows(path, ("generation",) + FEATURE_SYMBOLS, rows)


def write_scatter_csv(report: CVReport, path, table=None) -> None:
    rows = [
        (r["fiber"], r["range"], _num(r["actual"]), _num(r["estimated"]))
        for r in best_predictions_table(report, table)
    ]
    _write_rows(path, SCATTER_HEADER, rows)


def write_model_best(report: CVReport, path) -> None:
    best = report.best
    lines = [
        f"# target: {report.target}",
        f"# best repetition: {best.repetition} (pooled rmse {best.metrics['rmse']!r})",
        "# one model per held-out fiber: fiber<TAB>infix",
    ]
    for name, ind in zip(report.sample_names, best.fold_models):
        lines.append(f"{name}\t{to_infix(ind.scaled_tree())}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_experiment(report: CVReport, plan: ExperimentPlan, out_dir, table=None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = table or load_canonical()
    paths = {
        "predictions.csv": lambda p: write_predictions_csv(report, p),
        "metrics.json": lambda p: write_json(metrics_document(report, plan), p),
        "impact.csv": lambda p: write_impact_csv(report.impact, p),
        "model_best.txt": lambda p: write_model_best(report, p),
        "scatter.csv": lambda p: write_scatter_csv(report, p, table),
        "impact_by_generation.csv": lambda p: write_impact_curve_csv(report.impact, p),
    }
    written = []
    for name, writer in paths.items():
        writer(out / name)
        written.append(out / name)
    return written


def comparison_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_HEADER)
    for r in rows:
        w.writerow((r["fiber"], _num(r["actual"]), r["paper_estimate"], _num(r["computed"]),
                    _num(r["abs_dev"]), _num(r["rel_dev"])))
    return buf.getvalue()
