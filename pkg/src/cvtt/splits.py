"""Fold planning and train/validation/test materialization.

Rolling temporal folds over a period grid (expanding or windowed training
data, optionally with a randomized holdout), the classic one-shot splitting
strategies, and a leakage audit.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .ingest import InteractionLog, PeriodGrid

STRATEGY_KINDS = ("expand", "window", "random_expand", "random_window")
CLASSIC_KINDS = (
    "random",
    "user_split",
    "leave_one_out",
    "temporal_user",
    "temporal_global",
)


@dataclass(frozen=True)
class DataStrategy:
    """How training data is assembled for each fold.

    ``expand`` trains on every period before the validation period;
    ``window`` trains on only the last N periods. The ``random_`` variants
    keep the same fold layout but re-partition train+valid uniformly at
    random after materialization.
    """

    kind: str
    window: int | None = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ConfigError(f"unknown data strategy kind: {self.kind!r}")
        if self.kind.endswith("window"):
            if self.window is None or self.window < 1:
                raise ConfigError("window strategies need window >= 1")
        elif self.window is not None:
            raise ConfigError(f"{self.kind} does not take a window length")

    @property
    def randomized(self) -> bool:
        return self.kind.startswith("random_")

    def label(self) -> str:
        if self.kind.endswith("window"):
            return f"{self.kind}({self.window})"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "DataStrategy":
        """Parse labels like ``expand``, ``window(3)``, ``random_window(3)``."""
        text = text.strip()
        if "(" in text:
            kind, _, rest = text.partition("(")
            rest = rest.rstrip(")")
            try:
                return cls(kind=kind, window=int(rest))
            except ValueError:
                raise ConfigError(f"bad window length in strategy {text!r}") from None
        return cls(kind=text)


@dataclass(frozen=True)
class FoldPlan:
    """One temporal fold: which periods feed train, validation and test."""

    fold_index: int
    train_periods: tuple
    valid_period: int
    test_period: int
    strategy: DataStrategy

    def __post_init__(self):
        object.__setattr__(self, "train_periods", tuple(int(p) for p in self.train_periods))
        if self.valid_period != self.test_period - 1:
            raise ValueError("validation period must immediately precede the test period")
        if not self.train_periods:
            raise ValueError("a fold needs at least one training period")
        if max(self.train_periods) >= self.valid_period:
            raise ValueError("training periods must precede the validation period")


@dataclass(frozen=True)
class SplitTriple:
    train: InteractionLog
    valid: InteractionLog
    test: InteractionLog


@dataclass(frozen=True)
class ClassicStrategy:
    """One-shot split strategies commonly seen in offline evaluation."""

    kind: str
    test_fraction: float | None = None
    cut_timestamp: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CLASSIC_KINDS:
            raise ConfigError(f"unknown classic split kind: {self.kind!r}")
        if self.kind in ("random", "user_split", "temporal_user"):
            f = self.test_fraction
            if f is None or not (0.0 < f < 1.0):
                raise ConfigError(f"{self.kind} needs test_fraction in (0, 1)")
        if self.kind == "temporal_global" and self.cut_timestamp is None:
            raise ConfigError("temporal_global needs cut_timestamp")


@dataclass(frozen=True)
class LeakageViolation:
    kind: str  # "order" or "duplicate"
    earlier: str
    later: str
    count: int


@dataclass(frozen=True)
class LeakageReport:
    ok: bool
    violations: tuple


def plan_folds(
    grid: PeriodGrid, strategy: DataStrategy, min_train_periods: int = 1
) -> list[FoldPlan]:
    """Plan one fold per feasible test period.

    The earliest test period is ``min_train_periods + 1``, giving
    ``n_periods - min_train_periods - 1`` folds in total.
    """
    if min_train_periods < 1:
        raise ConfigError("min_train_periods must be >= 1")
    if grid.n_periods < min_train_periods + 2:
        raise DataError(
            f"need at least {min_train_periods + 2} periods for folds, "
            f"grid has {grid.n_periods}"
        )
    plans = []
    for fold_index, test_period in enumerate(range(min_train_periods + 1, grid.n_periods)):
        valid_period = test_period - 1
        if strategy.kind.endswith("window"):
            n_train = min(strategy.window, valid_period)
            train = tuple(range(valid_period - n_train, valid_period))
        else:
            train = tuple(range(valid_period))
        plans.append(FoldPlan(fold_index, train, valid_period, test_period, strategy))
    return plans


def write_fold_manifest(plans, path) -> None:
    """Plain-text audit manifest, one fold per line."""
    lines = []
    for plan in plans:
        train = ",".join(str(p) for p in plan.train_periods)
        lines.append(
            f"{plan.fold_index}\ttrain={train}\tvalid={plan.valid_period}"
            f"\ttest={plan.test_period}\t{plan.strategy.label()}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def materialize_fold(log: InteractionLog, grid: PeriodGrid, plan: FoldPlan) -> SplitTriple:
    """Route records into train/valid/test by period.

    Records in periods outside the plan are discarded (window strategies drop
    older history). Vocabularies are shared across the three parts.
    """
    periods = grid.period_of(log.timestamps)
    parts = {
        "train": log.subset(np.isin(periods, plan.train_periods)),
        "valid": log.subset(periods == plan.valid_period),
        "test": log.subset(periods == plan.test_period),
    }
    for name, part in parts.items():
        if len(part) == 0:
            raise DataError(f"fold {plan.fold_index}: empty {name} part")
    return SplitTriple(**parts)


def merge_logs(a: InteractionLog, b: InteractionLog) -> InteractionLog:
    """Concatenate two logs sharing vocabularies, re-sorted by timestamp."""
    if a.user_vocab is not b.user_vocab and dict(a.user_vocab) != dict(b.user_vocab):
        raise ValueError("logs must share a user vocabulary")
    ts = np.concatenate([a.timestamps, b.timestamps])
    order = np.argsort(ts, kind="stable")
    return InteractionLog(
        users=np.concatenate([a.users, b.users])[order],
        items=np.concatenate([a.items, b.items])[order],
        timestamps=ts[order],
        weights=np.concatenate([a.weights, b.weights])[order],
        user_vocab=a.user_vocab,
        item_vocab=a.item_vocab,
    )


def randomize_holdout(triple: SplitTriple, seed: int) -> SplitTriple:
    """Re-partition train+valid uniformly at random, leaving test untouched.

    The validation size is preserved exactly so randomized and temporal
    variants stay size-matched; the output is deterministic under ``seed``.
    """
    pool = merge_logs(triple.train, triple.valid)
    n_valid = len(triple.valid)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(pool))
    valid_mask = np.zeros(len(pool), dtype=bool)
    valid_mask[perm[:n_valid]] = True
    return SplitTriple(
        train=pool.subset(~valid_mask),
        valid=pool.subset(valid_mask),
        test=triple.test,
    )


def _per_user_order(log: InteractionLog):
    """Record indices grouped by user, each group in timestamp order."""
    order = np.argsort(log.users, kind="stable")  # stable keeps time order in groups
    users_sorted = log.users[order]
    boundaries = np.flatnonzero(np.diff(users_sorted)) + 1
    groups = np.split(order, boundaries)
    return [(int(users_sorted[g[0]]), g) for g in groups]


def classic_split(log: InteractionLog, strategy: ClassicStrategy) -> SplitTriple:
    """One-shot train/test split; the validation part is always empty here."""
    if len(log) == 0:
        raise DataError("cannot split an empty log")
    n = len(log)
    test_mask = np.zeros(n, dtype=bool)
    rng = np.random.default_rng(strategy.seed)

    if strategy.kind == "temporal_global":
        test_mask = log.timestamps >= strategy.cut_timestamp
    elif strategy.kind == "user_split":
        perm = rng.permutation(log.n_users)
        n_test_users = int(strategy.test_fraction * log.n_users)
        test_users = np.zeros(log.n_users, dtype=bool)
        test_users[perm[:n_test_users]] = True
        test_mask = test_users[log.users]
    else:
        for _, idx in _per_user_order(log):
            size = len(idx)
            if strategy.kind == "leave_one_out":
                if size >= 2:
                    test_mask[idx[-1]] = True
            elif strategy.kind == "temporal_user":
                n_test = int(strategy.test_fraction * size)
                if n_test:
                    test_mask[idx[-n_test:]] = True
            else:  # random
                n_test = int(strategy.test_fraction * size)
                if n_test:
                    test_mask[rng.choice(idx, size=n_test, replace=False)] = True

    if not test_mask.any():
        raise DataError(f"{strategy.kind} split produced an empty test part")
    return SplitTriple(
        train=log.subset(~test_mask),
        valid=log.subset(np.zeros(n, dtype=bool)),
        test=log.subset(test_mask),
    )


def assert_no_leakage(triple: SplitTriple) -> LeakageReport:
    """Audit a triple for temporal-order violations and cross-part duplicates.

    A record in an earlier part with a timestamp at or past the start of a
    later part is an order violation; an identical record present in two
    parts is a duplicate. Violations are reported, never raised.
    """
    parts = [("train", triple.train), ("valid", triple.valid), ("test", triple.test)]
    violations = []
    for i, (earlier_name, earlier) in enumerate(parts):
        for later_name, later in parts[i + 1:]:
            if len(earlier) == 0 or len(later) == 0:
                continue
            boundary = int(later.timestamps.min())
            count = int(np.count_nonzero(earlier.timestamps >= boundary))
            if count:
                violations.append(
                    LeakageViolation("order", earlier_name, later_name, count)
                )
            overlap = Counter(earlier.as_tuples()) & Counter(later.as_tuples())
            dup = sum(overlap.values())
            if dup:
                violations.append(
                    LeakageViolation("duplicate", earlier_name, later_name, dup)
                )
    return LeakageReport(ok=not violations, violations=tuple(violations))
