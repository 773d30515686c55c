"""Rolling temporal evaluation: tune per fold, refit, score on the test period.

Per fold the order is fixed: materialize the split, optionally randomize the
holdout, search hyperparameters on (train, valid), rebuild the matrix over
train+valid, fit the best parameters, and only then touch the test part via
``evaluate_ranking``. Fold seeds are derived from (seed, model, strategy,
fold), so adding a model or strategy never perturbs another series.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, CvttError, DataError
from .ingest import InteractionLog, assign_periods, matrix_from_log
from .metrics import METRIC_NAMES, evaluate_ranking, outcome_value
from .models import MODEL_KINDS
from .splits import (
    DataStrategy,
    FoldPlan,
    SplitTriple,
    materialize_fold,
    merge_logs,
    plan_folds,
    randomize_holdout,
)
from .tuning import SELECTION_K, SELECTION_METRIC, default_space, tune
from .util import derive_seed, fingerprint

REPORT_CSV_HEADER = (
    "dataset,model,strategy,fold,test_period,metric,k,value,n_eval,n_cold,best_params"
)


@dataclass(frozen=True)
class FoldResult:
    fold_index: int
    test_period: int
    strategy: str
    model: str
    best_params: dict
    outcomes: tuple  # EvalOutcome per (metric, k)
    trials: tuple  # TrialRecord log from the search
    tune_seconds: float
    fit_seconds: float


@dataclass(frozen=True)
class FoldFailure:
    model: str
    strategy: str
    fold_index: int
    message: str


@dataclass(frozen=True)
class SeriesResult:
    model: str
    strategy: str
    folds: tuple


@dataclass(frozen=True)
class CVTTReport:
    dataset: str
    fingerprint: str
    series: tuple
    failures: tuple


@dataclass(frozen=True)
class StrategySummary:
    model: str
    strategy: str
    n_folds: int
    mean: float
    std: float
    min: float
    max: float


@dataclass(frozen=True)
class PairedDelta:
    """Per-fold score difference: temporal strategy minus its random twin."""

    model: str
    strategy: str
    fold_index: int
    delta: float


@dataclass(frozen=True)
class StrategyComparison:
    summaries: tuple
    deltas: tuple


def evaluate_fold(
    triple: SplitTriple,
    plan: FoldPlan,
    kind: str,
    *,
    n_trials: int = 25,
    seed: int = 0,
    ks=(10,),
    aggregation: str = "count",
) -> FoldResult:
    """Tune on (train, valid), refit on train+valid, score on test."""
    from .models import make_recommender

    train_matrix = matrix_from_log(triple.train, aggregation)
    space = default_space(kind)

    t0 = time.perf_counter()
    tuned = tune(
        kind, space, train_matrix, triple.valid,
        n_trials=n_trials, seed=derive_seed(seed, "tune"), k=SELECTION_K,
    )
    tune_seconds = time.perf_counter() - t0

    trainvalid_matrix = matrix_from_log(merge_logs(triple.train, triple.valid), aggregation)
    t0 = time.perf_counter()
    model = make_recommender(kind, tuned.best_params, random_state=derive_seed(seed, "refit"))
    model.fit(trainvalid_matrix)
    fit_seconds = time.perf_counter() - t0

    outcomes = evaluate_ranking(model, trainvalid_matrix, triple.test, ks=ks)
    return FoldResult(
        fold_index=plan.fold_index,
        test_period=plan.test_period,
        strategy=plan.strategy.label(),
        model=kind,
        best_params=dict(tuned.best_params),
        outcomes=tuple(outcomes),
        trials=tuned.trials,
        tune_seconds=tune_seconds,
        fit_seconds=fit_seconds,
    )


def run_fold(
    log: InteractionLog,
    grid,
    plan: FoldPlan,
    kind: str,
    *,
    n_trials: int = 25,
    seed: int = 0,
    ks=(10,),
    aggregation: str = "count",
) -> FoldResult:
    """Materialize one fold and evaluate it end to end."""
    triple = materialize_fold(log, grid, plan)
    if plan.strategy.randomized:
        triple = randomize_holdout(triple, derive_seed(seed, "holdout"))
    return evaluate_fold(
        triple, plan, kind,
        n_trials=n_trials, seed=seed, ks=ks, aggregation=aggregation,
    )


def _normalize_strategies(strategies) -> list[DataStrategy]:
    out = []
    for s in strategies:
        out.append(s if isinstance(s, DataStrategy) else DataStrategy.parse(str(s)))
    if not out:
        raise ConfigError("at least one data strategy is required")
    return out


def run_cvtt(
    log: InteractionLog,
    *,
    strategies,
    models,
    granularity="calendar_month",
    n_trials: int = 25,
    seed: int = 0,
    ks=(10,),
    metrics=METRIC_NAMES,
    min_train_periods: int = 1,
    aggregation: str = "count",
    dataset_label: str = "dataset",
    threads: int = 1,
) -> CVTTReport:
    """Run every (model, strategy) series over all folds of the grid.

    Fold failures (for example an empty validation period) are recorded and
    skipped rather than aborting the run. Deterministic under ``seed``; with
    ``threads > 1`` folds run in parallel and are merged by index.
    """
    strategies = _normalize_strategies(strategies)
    models = list(models)
    unknown = [m for m in models if m not in MODEL_KINDS]
    if unknown:
        raise ConfigError(f"unknown model kinds {unknown}; known kinds: {MODEL_KINDS}")
    bad_metrics = [m for m in metrics if m not in METRIC_NAMES]
    if bad_metrics:
        raise ConfigError(f"unknown metrics {bad_metrics}; known: {METRIC_NAMES}")
    if threads < 1:
        raise ConfigError("threads must be >= 1")

    grid = assign_periods(log, granularity)
    if grid.n_periods < 3:
        raise DataError(f"need at least 3 periods, the grid has {grid.n_periods}")

    config = {
        "dataset": dataset_label,
        "granularity": str(granularity),
        "strategies": [s.label() for s in strategies],
        "models": models,
        "n_trials": n_trials,
        "seed": seed,
        "ks": sorted(set(int(k) for k in ks)),
        "metrics": list(metrics),
        "min_train_periods": min_train_periods,
        "aggregation": aggregation,
    }

    tasks = []
    for model in models:
        for strategy in strategies:
            for plan in plan_folds(grid, strategy, min_train_periods):
                fold_seed = derive_seed(seed, model, strategy.label(), plan.fold_index)
                tasks.append((model, strategy, plan, fold_seed))

    def execute(task):
        model, strategy, plan, fold_seed = task
        try:
            result = run_fold(
                log, grid, plan, model,
                n_trials=n_trials, seed=fold_seed, ks=ks, aggregation=aggregation,
            )
            return model, strategy, plan, result, None
        except CvttError as exc:
            return model, strategy, plan, None, str(exc)

    if threads == 1:
        finished = [execute(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            finished = list(pool.map(execute, tasks))

    by_series: dict[tuple, list[FoldResult]] = {}
    failures = []
    for model, strategy, plan, result, error in finished:
        key = (model, strategy.label())
        if error is not None:
            failures.append(FoldFailure(model, strategy.label(), plan.fold_index, error))
            continue
        wanted = tuple(o for o in result.outcomes if o.metric in metrics)
        by_series.setdefault(key, []).append(
            FoldResult(
                result.fold_index, result.test_period, result.strategy, result.model,
                result.best_params, wanted, result.trials,
                result.tune_seconds, result.fit_seconds,
            )
        )

    series = []
    for model in models:
        for strategy in strategies:
            folds = by_series.get((model, strategy.label()), [])
            series.append(
                SeriesResult(
                    model, strategy.label(),
                    tuple(sorted(folds, key=lambda f: f.fold_index)),
                )
            )
    return CVTTReport(
        dataset=dataset_label,
        fingerprint=fingerprint(config),
        series=tuple(series),
        failures=tuple(failures),
    )


def compare_strategies(report: CVTTReport, k: int = SELECTION_K) -> StrategyComparison:
    """Aggregate NDCG@k per series and diff paired temporal/random strategies."""
    if not report.series or all(not s.folds for s in report.series):
        raise DataError("report has no fold results to compare")
    summaries = []
    per_series: dict[tuple, dict[int, float]] = {}
    for s in report.series:
        scores = {
            f.fold_index: outcome_value(f.outcomes, SELECTION_METRIC, k) for f in s.folds
        }
        per_series[(s.model, s.strategy)] = scores
        if scores:
            vals = np.array(list(scores.values()))
            summaries.append(
                StrategySummary(
                    s.model, s.strategy, len(vals),
                    float(vals.mean()), float(vals.std()),
                    float(vals.min()), float(vals.max()),
                )
            )
    deltas = []
    for (model, strategy), scores in per_series.items():
        if strategy.startswith("random_"):
            continue
        twin = per_series.get((model, f"random_{strategy}"))
        if twin is None:
            continue
        for fold_index in sorted(set(scores) & set(twin)):
            deltas.append(
                PairedDelta(model, strategy, fold_index, scores[fold_index] - twin[fold_index])
            )
    return StrategyComparison(tuple(summaries), tuple(deltas))


def write_report_csv(report: CVTTReport, path) -> None:
    Path(path).write_text(report_to_csv(report), encoding="utf-8")


def report_to_csv(report: CVTTReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_CSV_HEADER.split(","))
    for s in report.series:
        for fold in s.folds:
            params = json.dumps(fold.best_params, sort_keys=True)
            for out in fold.outcomes:
                writer.writerow(
                    [
                        report.dataset, s.model, s.strategy,
                        fold.fold_index, fold.test_period,
                        out.metric, out.k, repr(out.mean),
                        out.n_users_evaluated, out.n_users_skipped_cold,
                        params,
                    ]
                )
    return buf.getvalue()


def read_report_csv(path) -> list[dict]:
    """Rows of a report CSV as dicts with numeric fields restored."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = REPORT_CSV_HEADER.split(",")
        if reader.fieldnames != expected:
            raise DataError(f"{path} is not a report CSV (header {reader.fieldnames})")
        rows = []
        for row in reader:
            row["fold"] = int(row["fold"])
            row["test_period"] = int(row["test_period"])
            row["k"] = int(row["k"])
            row["value"] = float(row["value"])
            row["n_eval"] = int(row["n_eval"])
            row["n_cold"] = int(row["n_cold"])
            rows.append(row)
    return rows
