"""Interaction log ingestion.

Parses delimited interaction files into dense-id logs, assigns calendar or
fixed-width periods, applies per-period activity filtering, and builds sparse
user-item matrices for the recommenders.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Mapping, NamedTuple

import numpy as np
from scipy import sparse

from .errors import ConfigError, DataError

_log = logging.getLogger(__name__)

AGGREGATIONS = ("count", "sum_weight", "binary")
TIMESTAMP_FORMATS = ("unix", "iso8601")

MAX_FILTER_ITERATIONS = 100


class Interaction(NamedTuple):
    user: int
    item: int
    timestamp: int
    weight: float


@dataclass(frozen=True, eq=False)
class InteractionLog:
    """Deduplicated-vocabulary, time-sorted interaction records.

    ``users``/``items`` hold dense ids forming contiguous ranges
    ``[0, n_users)`` and ``[0, n_items)``; the vocabularies map raw ids to
    dense ids. Splits derived from a log share its vocabularies, so a part
    may reference only a subset of the dense range. Arrays are read-only.
    """

    users: np.ndarray
    items: np.ndarray
    timestamps: np.ndarray
    weights: np.ndarray
    user_vocab: Mapping
    item_vocab: Mapping
    skipped_rows: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "users", np.asarray(self.users, dtype=np.int64))
        object.__setattr__(self, "items", np.asarray(self.items, dtype=np.int64))
        object.__setattr__(self, "timestamps", np.asarray(self.timestamps, dtype=np.int64))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        n = len(self.users)
        if not (len(self.items) == len(self.timestamps) == len(self.weights) == n):
            raise ValueError("interaction arrays must have equal length")
        if n:
            if np.any(np.diff(self.timestamps) < 0):
                raise ValueError("records must be sorted by nondecreasing timestamp")
            if self.weights.min() < 0:
                raise ValueError("weights must be nonnegative")
        for arr in (self.users, self.items, self.timestamps, self.weights):
            arr.setflags(write=False)

    @property
    def n_users(self) -> int:
        return len(self.user_vocab)

    @property
    def n_items(self) -> int:
        return len(self.item_vocab)

    def __len__(self) -> int:
        return len(self.users)

    def record(self, i: int) -> Interaction:
        return Interaction(
            int(self.users[i]), int(self.items[i]),
            int(self.timestamps[i]), float(self.weights[i]),
        )

    def __iter__(self) -> Iterator[Interaction]:
        return (self.record(i) for i in range(len(self)))

    def as_tuples(self) -> list[tuple]:
        """Records as plain tuples, handy for multiset comparisons in tests."""
        return [self.record(i) for i in range(len(self))]

    def subset(self, mask: np.ndarray) -> "InteractionLog":
        """New log with the masked records; vocabularies are shared, not rebuilt."""
        return InteractionLog(
            users=self.users[mask],
            items=self.items[mask],
            timestamps=self.timestamps[mask],
            weights=self.weights[mask],
            user_vocab=self.user_vocab,
            item_vocab=self.item_vocab,
        )


@dataclass(frozen=True)
class ColumnSchema:
    """Column mapping for delimited input; entries are header names or 0-based indices."""

    user: str | int
    item: str | int
    timestamp: str | int
    weight: str | int | None = None


@dataclass(frozen=True)
class PeriodGrid:
    """Maps timestamps to integer period indices.

    ``origin`` is the unix-second start of period 0. Calendar months are
    computed in UTC; ``period_seconds`` applies to fixed-width grids only.
    """

    granularity: str
    origin: int
    n_periods: int
    period_seconds: int | None = None

    def __post_init__(self):
        if self.granularity not in ("calendar_month", "fixed_seconds"):
            raise ConfigError(f"unknown granularity: {self.granularity!r}")
        if self.granularity == "fixed_seconds" and (
            self.period_seconds is None or self.period_seconds < 1
        ):
            raise ConfigError("fixed_seconds grids need period_seconds >= 1")
        if self.n_periods < 1:
            raise ValueError("a grid must cover at least one period")

    def period_of(self, timestamps):
        """Period index for a unix-second timestamp or array thereof."""
        ts = np.asarray(timestamps, dtype=np.int64)
        if self.granularity == "calendar_month":
            out = _month_index(ts) - _month_index(np.int64(self.origin))
        else:
            out = (ts - self.origin) // self.period_seconds
        if np.ndim(timestamps) == 0:
            return int(out)
        return out


@dataclass(frozen=True)
class DatasetStats:
    n_users: int
    n_items: int
    n_interactions: int
    inter_per_user: float
    inter_per_user_per_period: float
    inter_per_item: float
    inter_per_item_per_period: float


STATS_CSV_HEADER = (
    "users,items,interactions,inter_per_user,inter_per_user_per_period,"
    "inter_per_item,inter_per_item_per_period"
)


def _month_index(ts):
    # months since 1970-01, computed in UTC via datetime64 truncation
    return ts.astype("datetime64[s]").astype("datetime64[M]").astype(np.int64)


def _parse_timestamp(text: str, timestamp_format: str) -> int:
    if timestamp_format == "unix":
        return int(float(text))
    dt = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _normalize_schema(schema) -> ColumnSchema:
    if isinstance(schema, ColumnSchema):
        out = schema
    elif isinstance(schema, Mapping):
        unknown = set(schema) - {"user", "item", "timestamp", "weight"}
        if unknown:
            raise ConfigError(f"unknown schema keys: {sorted(unknown)}")
        try:
            out = ColumnSchema(
                user=schema["user"], item=schema["item"],
                timestamp=schema["timestamp"], weight=schema.get("weight"),
            )
        except KeyError as exc:
            raise ConfigError(f"schema is missing required column: {exc}") from None
    else:
        raise ConfigError("schema must be a ColumnSchema or mapping")
    refs = [out.user, out.item, out.timestamp]
    if out.weight is not None:
        refs.append(out.weight)
    if len(set(refs)) != len(refs):
        raise ConfigError("schema maps two fields to the same column")
    return out


def parse_interactions(
    path,
    schema,
    *,
    timestamp_format: str = "unix",
    delimiter: str = ",",
    has_header: bool | None = None,
) -> InteractionLog:
    """Parse a delimited interaction file into an :class:`InteractionLog`.

    Rows with unparseable fields are skipped and their 1-based line numbers
    collected on ``skipped_rows``. Duplicate (user, item, timestamp) rows are
    kept as separate records. Dense ids are assigned in order of first
    appearance; records are then stably sorted by timestamp.
    """
    schema = _normalize_schema(schema)
    if timestamp_format not in TIMESTAMP_FORMATS:
        raise ConfigError(f"timestamp_format must be one of {TIMESTAMP_FORMATS}")
    path = Path(path)
    if not path.exists():
        raise DataError(f"interaction file not found: {path}")
    if has_header is None:
        has_header = any(
            isinstance(ref, str)
            for ref in (schema.user, schema.item, schema.timestamp, schema.weight)
            if ref is not None
        )

    users: list[int] = []
    items: list[int] = []
    stamps: list[int] = []
    weights: list[float] = []
    user_vocab: dict = {}
    item_vocab: dict = {}
    skipped: list[int] = []

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        line = 0
        columns = None
        for row in reader:
            line += 1
            if line == 1 and has_header:
                columns = _resolve_columns(schema, row)
                continue
            if columns is None:
                columns = _resolve_columns(schema, None)
            u_col, i_col, t_col, w_col = columns
            try:
                raw_user = row[u_col].strip()
                raw_item = row[i_col].strip()
                if not raw_user or not raw_item:
                    raise ValueError("empty id field")
                ts = _parse_timestamp(row[t_col], timestamp_format)
                weight = 1.0 if w_col is None else float(row[w_col])
                if weight < 0:
                    raise ValueError("negative weight")
            except (IndexError, ValueError):
                skipped.append(line)
                continue
            users.append(user_vocab.setdefault(raw_user, len(user_vocab)))
            items.append(item_vocab.setdefault(raw_item, len(item_vocab)))
            stamps.append(ts)
            weights.append(weight)

    if not users:
        raise DataError(f"no parseable interactions in {path}")
    if skipped:
        _log.warning("skipped %d malformed rows in %s", len(skipped), path)

    order = np.argsort(np.asarray(stamps, dtype=np.int64), kind="stable")
    return InteractionLog(
        users=np.asarray(users, dtype=np.int64)[order],
        items=np.asarray(items, dtype=np.int64)[order],
        timestamps=np.asarray(stamps, dtype=np.int64)[order],
        weights=np.asarray(weights, dtype=np.float64)[order],
        user_vocab=user_vocab,
        item_vocab=item_vocab,
        skipped_rows=tuple(skipped),
    )


def _resolve_columns(schema: ColumnSchema, header):
    def resolve(ref):
        if ref is None:
            return None
        if isinstance(ref, int):
            return ref
        if header is None:
            raise ConfigError(
                f"column {ref!r} given by name but the file has no header"
            )
        try:
            return header.index(ref)
        except ValueError:
            raise ConfigError(f"column {ref!r} not found in header {header}") from None

    return (
        resolve(schema.user),
        resolve(schema.item),
        resolve(schema.timestamp),
        resolve(schema.weight),
    )


def write_interactions(log: InteractionLog, path, *, delimiter: str = ",") -> None:
    """Write a log back to the delimited format ``parse_interactions`` accepts."""
    inv_users = {dense: raw for raw, dense in log.user_vocab.items()}
    inv_items = {dense: raw for raw, dense in log.item_vocab.items()}
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow(["user", "item", "timestamp", "weight"])
        for rec in log:
            writer.writerow(
                [inv_users[rec.user], inv_items[rec.item], rec.timestamp, repr(rec.weight)]
            )


def assign_periods(log: InteractionLog, granularity="calendar_month") -> PeriodGrid:
    """Build the period grid covering a log's time range.

    ``granularity`` is either the string ``"calendar_month"`` or an integer
    period width in seconds. Period 0 contains the earliest timestamp.
    """
    if len(log) == 0:
        raise DataError("cannot assign periods to an empty log")
    t_min = int(log.timestamps[0])
    t_max = int(log.timestamps[-1])
    if granularity == "calendar_month":
        origin_month = int(_month_index(np.int64(t_min)))
        origin = int(
            np.datetime64(origin_month, "M").astype("datetime64[s]").astype(np.int64)
        )
        n_periods = int(_month_index(np.int64(t_max))) - origin_month + 1
        return PeriodGrid("calendar_month", origin, n_periods)
    if isinstance(granularity, bool) or not isinstance(granularity, (int, np.integer)):
        raise ConfigError(
            f"granularity must be 'calendar_month' or a positive integer of seconds, "
            f"got {granularity!r}"
        )
    if granularity < 1:
        raise ConfigError("fixed period width must be >= 1 second")
    width = int(granularity)
    n_periods = (t_max - t_min) // width + 1
    return PeriodGrid("fixed_seconds", t_min, n_periods, period_seconds=width)


def _coverage(entity_ids, periods, n_entities, n_periods):
    """Number of distinct active periods per entity id."""
    if len(entity_ids) == 0:
        return np.zeros(n_entities, dtype=np.int64)
    keys = np.unique(entity_ids * np.int64(n_periods) + periods)
    return np.bincount(keys // n_periods, minlength=n_entities)


def filter_per_period_activity(log: InteractionLog, grid: PeriodGrid) -> InteractionLog:
    """Keep only users and items active in every period of the grid.

    Alternates a user pass and an item pass until a fixpoint: dropping an
    item can leave a user without coverage in some period, and vice versa.
    Vocabularies are re-densified; the caller must recompute the grid if the
    surviving time range shrank.
    """
    periods = grid.period_of(log.timestamps)
    keep = np.ones(len(log), dtype=bool)
    n_users, n_items, n_periods = log.n_users, log.n_items, grid.n_periods

    for iteration in range(1, MAX_FILTER_ITERATIONS + 1):
        changed = False
        for ids, n_entities in ((log.users, n_users), (log.items, n_items)):
            cov = _coverage(ids[keep], periods[keep], n_entities, n_periods)
            drop = keep & (cov < n_periods)[ids]
            if drop.any():
                keep &= ~drop
                changed = True
            if not keep.any():
                raise DataError(
                    f"activity filter removed every interaction at iteration {iteration}"
                )
        if not changed:
            break
    else:
        raise DataError(
            f"activity filter did not converge within {MAX_FILTER_ITERATIONS} iterations"
        )

    return _redensify(log, keep)


def _redensify(log: InteractionLog, keep: np.ndarray) -> InteractionLog:
    kept_users = np.unique(log.users[keep])
    kept_items = np.unique(log.items[keep])
    user_remap = np.full(log.n_users, -1, dtype=np.int64)
    user_remap[kept_users] = np.arange(len(kept_users))
    item_remap = np.full(log.n_items, -1, dtype=np.int64)
    item_remap[kept_items] = np.arange(len(kept_items))

    inv_users = {dense: raw for raw, dense in log.user_vocab.items()}
    inv_items = {dense: raw for raw, dense in log.item_vocab.items()}
    return InteractionLog(
        users=user_remap[log.users[keep]],
        items=item_remap[log.items[keep]],
        timestamps=log.timestamps[keep],
        weights=log.weights[keep],
        user_vocab={inv_users[int(old)]: new for new, old in enumerate(kept_users)},
        item_vocab={inv_items[int(old)]: new for new, old in enumerate(kept_items)},
    )


def dataset_stats(log: InteractionLog, grid: PeriodGrid | None = None) -> DatasetStats:
    """Summary counts and per-entity means; an empty log yields all zeros."""
    n = len(log)
    if n == 0:
        return DatasetStats(0, 0, 0, 0.0, 0.0, 0.0, 0.0)
    if grid is None:
        raise ValueError("a period grid is required for a nonempty log")
    per_user = n / log.n_users
    per_item = n / log.n_items
    return DatasetStats(
        n_users=log.n_users,
        n_items=log.n_items,
        n_interactions=n,
        inter_per_user=per_user,
        inter_per_user_per_period=per_user / grid.n_periods,
        inter_per_item=per_item,
        inter_per_item_per_period=per_item / grid.n_periods,
    )


def stats_csv_row(stats: DatasetStats) -> str:
    return ",".join(
        [
            str(stats.n_users),
            str(stats.n_items),
            str(stats.n_interactions),
            repr(stats.inter_per_user),
            repr(stats.inter_per_user_per_period),
            repr(stats.inter_per_item),
            repr(stats.inter_per_item_per_period),
        ]
    )


def matrix_from_log(log: InteractionLog, aggregation: str = "count") -> sparse.csr_matrix:
    """Aggregate every record of a log into a users x items CSR matrix."""
    if aggregation not in AGGREGATIONS:
        raise ConfigError(f"aggregation must be one of {AGGREGATIONS}")
    if aggregation == "sum_weight":
        data = log.weights.astype(np.float64)
    else:
        data = np.ones(len(log), dtype=np.float64)
    mat = sparse.coo_matrix(
        (data, (log.users, log.items)), shape=(log.n_users, log.n_items)
    ).tocsr()
    mat.sum_duplicates()
    if aggregation == "binary":
        mat.data[:] = 1.0
    mat.eliminate_zeros()
    return mat


def build_matrix(
    log: InteractionLog,
    periods,
    grid: PeriodGrid,
    aggregation: str = "count",
) -> sparse.csr_matrix:
    """Users x items matrix over the records falling in the given periods.

    Duplicate (user, item) pairs are aggregated per ``aggregation``; matrix
    dimensions are the full vocabulary sizes even if some rows or columns
    end up empty.
    """
    period_list = sorted(int(p) for p in periods)
    if not period_list:
        raise DataError("build_matrix needs a nonempty period set")
    if period_list[0] < 0 or period_list[-1] >= grid.n_periods:
        raise DataError(
            f"periods {period_list} outside grid range [0, {grid.n_periods})"
        )
    mask = np.isin(grid.period_of(log.timestamps), period_list)
    return matrix_from_log(log.subset(mask), aggregation)
