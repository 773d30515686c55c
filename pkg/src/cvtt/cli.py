"""Command-line frontend.

Commands: ``stats`` (dataset statistics before/after activity filtering),
``run`` (config-driven rolling evaluation writing CSV/SVG reports), ``plot``
(chart a report CSV), and ``synth`` (emit a synthetic dataset). Exit codes:
0 success, 1 usage or config error, 2 data error, 3 execution failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .charts import ChartSeries, render_line_chart
from .errors import ConfigError, CvttError, DataError
from .ingest import (
    STATS_CSV_HEADER,
    assign_periods,
    dataset_stats,
    filter_per_period_activity,
    parse_interactions,
    stats_csv_row,
    write_interactions,
)
from .metrics import METRIC_NAMES
from .models import MODEL_KINDS
from .runner import read_report_csv, run_cvtt, report_to_csv
from .synth import DriftScenario, generate
from .tuning import trials_to_csv
from .util import slugify

_RUN_CONFIG_KEYS = {
    "dataset", "granularity", "filter_inactive", "strategies", "models",
    "n_trials", "seed", "metrics", "ks", "min_train_periods", "aggregation",
    "output_dir",
}
_DATASET_KEYS = {
    "path", "label", "columns", "timestamp_format", "delimiter", "has_header",
    "synthetic",
}
_SYNTH_KEYS = {
    "n_users", "n_items", "n_periods", "interactions_per_user",
    "shift_period", "seed", "period_seconds",
}


class UsageError(CvttError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _column_ref(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _granularity(text: str):
    if text == "calendar_month":
        return text
    try:
        return int(text)
    except ValueError:
        raise UsageError(
            f"granularity must be 'calendar_month' or an integer of seconds, got {text!r}"
        ) from None


def _delimiter(text: str) -> str:
    return "\t" if text == "tab" else text


def build_parser() -> _Parser:
    parser = _Parser(prog="cvtt", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cvtt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_stats = sub.add_parser("stats", help="dataset statistics before/after filtering")
    p_stats.add_argument("dataset", help="path to a delimited interaction file")
    p_stats.add_argument("--user-col", default="user", type=_column_ref)
    p_stats.add_argument("--item-col", default="item", type=_column_ref)
    p_stats.add_argument("--time-col", default="timestamp", type=_column_ref)
    p_stats.add_argument("--weight-col", default=None, type=_column_ref)
    p_stats.add_argument("--timestamp-format", default="unix", choices=["unix", "iso8601"])
    p_stats.add_argument("--delimiter", default=",", type=_delimiter,
                         help="field delimiter; use 'tab' for tab-separated")
    p_stats.add_argument("--granularity", default="calendar_month", type=_granularity)
    p_stats.set_defaults(func=cmd_stats)

    p_run = sub.add_parser("run", help="run the rolling evaluation from a config file")
    p_run.add_argument("-c", "--config", required=True, help="JSON config path")
    p_run.add_argument("-o", "--output-dir", default=None, help="overrides output_dir")
    p_run.add_argument("--seed", type=int, default=None, help="overrides seed")
    p_run.add_argument("--n-trials", type=int, default=None, help="overrides n_trials")
    p_run.add_argument("--threads", type=int, default=1,
                       help="fold workers; 1 guarantees byte-stable outputs")
    p_run.set_defaults(func=cmd_run)

    p_plot = sub.add_parser("plot", help="render a report CSV as an SVG line chart")
    p_plot.add_argument("report", help="path to report.csv")
    p_plot.add_argument("--metric", default="ndcg", choices=list(METRIC_NAMES))
    p_plot.add_argument("--k", type=int, default=10)
    p_plot.add_argument("-o", "--output", required=True, help="SVG output path")
    p_plot.set_defaults(func=cmd_plot)

    p_synth = sub.add_parser("synth", help="emit a synthetic interaction dataset")
    p_synth.add_argument("-o", "--output", required=True)
    p_synth.add_argument("--users", type=int, default=100)
    p_synth.add_argument("--items", type=int, default=50)
    p_synth.add_argument("--periods", type=int, default=8)
    p_synth.add_argument("--per-user", type=int, default=3,
                         help="interactions per user per period")
    p_synth.add_argument("--shift-period", type=int, default=None,
                         help="period at which item popularity switches")
    p_synth.add_argument("--period-seconds", type=int, default=86400)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)
    return parser


def cmd_stats(args) -> int:
    schema = {
        "user": args.user_col,
        "item": args.item_col,
        "timestamp": args.time_col,
    }
    if args.weight_col is not None:
        schema["weight"] = args.weight_col
    log = parse_interactions(
        args.dataset, schema,
        timestamp_format=args.timestamp_format, delimiter=args.delimiter,
    )
    if log.skipped_rows:
        shown = ", ".join(str(n) for n in log.skipped_rows[:20])
        more = "" if len(log.skipped_rows) <= 20 else f" (+{len(log.skipped_rows) - 20} more)"
        print(
            f"warning: skipped {len(log.skipped_rows)} malformed rows "
            f"at lines {shown}{more}",
            file=sys.stderr,
        )
    grid = assign_periods(log, args.granularity)
    before = dataset_stats(log, grid)
    filtered = filter_per_period_activity(log, grid)
    after = dataset_stats(filtered, assign_periods(filtered, args.granularity))
    print("phase," + STATS_CSV_HEADER)
    print("raw," + stats_csv_row(before))
    print("filtered," + stats_csv_row(after))
    return 0


def _check_keys(mapping, allowed, context):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")


def _load_config(path) -> dict:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    return config


def _resolve_config(args) -> dict:
    config = _load_config(args.config)
    _check_keys(config, _RUN_CONFIG_KEYS, "config")
    dataset = config.get("dataset")
    if not isinstance(dataset, dict):
        raise ConfigError("config needs a 'dataset' object")
    _check_keys(dataset, _DATASET_KEYS, "dataset")
    if ("path" in dataset) == ("synthetic" in dataset):
        raise ConfigError("dataset needs exactly one of 'path' or 'synthetic'")
    if "synthetic" in dataset:
        _check_keys(dataset["synthetic"], _SYNTH_KEYS, "dataset.synthetic")

    resolved = {
        "dataset": dataset,
        "granularity": config.get("granularity", "calendar_month"),
        "filter_inactive": bool(config.get("filter_inactive", True)),
        "strategies": config.get("strategies", ["expand"]),
        "models": config.get("models", ["popularity"]),
        "n_trials": int(config.get("n_trials", 25)),
        "seed": int(config.get("seed", 0)),
        "metrics": config.get("metrics", list(METRIC_NAMES)),
        "ks": config.get("ks", [10]),
        "min_train_periods": int(config.get("min_train_periods", 1)),
        "aggregation": config.get("aggregation", "count"),
        "output_dir": config.get("output_dir", "cvtt-out"),
    }
    if args.output_dir is not None:
        resolved["output_dir"] = args.output_dir
    if args.seed is not None:
        resolved["seed"] = args.seed
    if args.n_trials is not None:
        resolved["n_trials"] = args.n_trials

    unknown_models = [m for m in resolved["models"] if m not in MODEL_KINDS]
    if unknown_models:
        raise ConfigError(
            f"unknown model names {unknown_models} in config; known: {list(MODEL_KINDS)}"
        )
    granularity = resolved["granularity"]
    if granularity != "calendar_month" and not isinstance(granularity, int):
        raise ConfigError("granularity must be 'calendar_month' or integer seconds")
    return resolved


def _load_dataset(dataset_cfg):
    label = dataset_cfg.get("label")
    if "synthetic" in dataset_cfg:
        scenario = DriftScenario.with_popularity_shift(**dataset_cfg["synthetic"])
        return generate(scenario), label or "synthetic"
    columns = dataset_cfg.get("columns")
    if not isinstance(columns, dict):
        raise ConfigError("file datasets need a 'columns' mapping")
    log = parse_interactions(
        dataset_cfg["path"],
        columns,
        timestamp_format=dataset_cfg.get("timestamp_format", "unix"),
        delimiter=_delimiter(dataset_cfg.get("delimiter", ",")),
        has_header=dataset_cfg.get("has_header"),
    )
    return log, label or Path(dataset_cfg["path"]).stem


def cmd_run(args) -> int:
    config = _resolve_config(args)
    log, label = _load_dataset(config["dataset"])
    if config["filter_inactive"]:
        grid = assign_periods(log, config["granularity"])
        log = filter_per_period_activity(log, grid)

    report = run_cvtt(
        log,
        strategies=config["strategies"],
        models=config["models"],
        granularity=config["granularity"],
        n_trials=config["n_trials"],
        seed=config["seed"],
        ks=config["ks"],
        metrics=config["metrics"],
        min_train_periods=config["min_train_periods"],
        aggregation=config["aggregation"],
        dataset_label=label,
        threads=args.threads,
    )

    out_dir = Path(config["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.csv").write_text(report_to_csv(report), encoding="utf-8")

    trials_dir = out_dir / "trials"
    trials_dir.mkdir(exist_ok=True)
    for series in report.series:
        for fold in series.folds:
            name = f"{series.model}__{slugify(series.strategy)}__fold{fold.fold_index:03d}.csv"
            (trials_dir / name).write_text(trials_to_csv(fold.trials), encoding="utf-8")

    metric = config["metrics"][0]
    k = sorted(config["ks"])[0]
    chart = [
        ChartSeries(
            f"{s.model} {s.strategy}",
            tuple(
                (f.fold_index, _fold_value(f, metric, k))
                for f in s.folds
                if _fold_value(f, metric, k) is not None
            ),
        )
        for s in report.series
    ]
    chart = [c for c in chart if c.points]
    if chart:
        svg = render_line_chart(chart, title=f"{label}: {metric}@{k} over folds")
        (out_dir / "report.svg").write_text(svg, encoding="utf-8")

    manifest = {
        "config": {**config, "output_dir": str(config["output_dir"])},
        "fingerprint": report.fingerprint,
        "version": __version__,
        "failures": [
            {"model": f.model, "strategy": f.strategy,
             "fold": f.fold_index, "message": f.message}
            for f in report.failures
        ],
        "series": [
            {"model": s.model, "strategy": s.strategy, "n_folds": len(s.folds)}
            for s in report.series
        ],
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {out_dir / 'report.csv'}")
    return 0


def _fold_value(fold, metric, k):
    for out in fold.outcomes:
        if out.metric == metric and out.k == k:
            return out.mean
    return None


def cmd_plot(args) -> int:
    rows = read_report_csv(args.report)
    wanted = [r for r in rows if r["metric"] == args.metric and r["k"] == args.k]
    if not wanted:
        raise DataError(f"report has no rows for {args.metric}@{args.k}")
    series: dict[tuple, list] = {}
    for row in wanted:
        series.setdefault((row["model"], row["strategy"]), []).append(
            (row["fold"], row["value"])
        )
    chart = [
        ChartSeries(f"{model} {strategy}", tuple(sorted(points)))
        for (model, strategy), points in series.items()
    ]
    svg = render_line_chart(chart, title=f"{args.metric}@{args.k} over folds")
    Path(args.output).write_text(svg, encoding="utf-8")
    print(f"wrote {args.output}")
    return 0


def cmd_synth(args) -> int:
    scenario = DriftScenario.with_popularity_shift(
        n_users=args.users,
        n_items=args.items,
        n_periods=args.periods,
        interactions_per_user=args.per_user,
        shift_period=args.shift_period,
        seed=args.seed,
        period_seconds=args.period_seconds,
    )
    log = generate(scenario)
    write_interactions(log, args.output)
    print(f"wrote {len(log)} interactions to {args.output}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"cvtt: error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"cvtt: error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"cvtt: data error: {exc}", file=sys.stderr)
        return 2
    except CvttError as exc:
        print(f"cvtt: execution failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
