"""Per-fold hyperparameter search.

The default sampler is seeded independent random search: parameters for all
trials are drawn up front from one generator, so a trial log is a pure
function of (seed, space, data) regardless of execution order. Each trial
fits on the training matrix only and is scored by NDCG@10 on the validation
log; the test part is never visible here by construction.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FitError
from .ingest import InteractionLog
from .metrics import evaluate_ranking, outcome_value
from .models import make_recommender
from .util import derive_seed

DIMENSION_KINDS = ("real_uniform", "real_log_uniform", "int_uniform", "categorical")

SELECTION_METRIC = "ndcg"
SELECTION_K = 10


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str
    low: float | None = None
    high: float | None = None
    choices: tuple | None = None

    def __post_init__(self):
        if self.kind not in DIMENSION_KINDS:
            raise ConfigError(f"unknown dimension kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.choices:
                raise ConfigError(f"dimension {self.name}: empty choice list")
        else:
            if self.low is None or self.high is None or not self.low < self.high:
                raise ConfigError(f"dimension {self.name}: bounds must satisfy low < high")
            if self.kind == "real_log_uniform" and self.low <= 0:
                raise ConfigError(f"dimension {self.name}: log-uniform needs low > 0")


@dataclass(frozen=True)
class SearchSpace:
    model: str
    dimensions: tuple


@dataclass(frozen=True)
class TrialRecord:
    index: int
    params: dict
    score: float | None
    seconds: float
    failed: bool = False
    error: str = ""


@dataclass(frozen=True)
class TuneResult:
    best_params: dict
    best_score: float
    best_index: int
    trials: tuple


def default_space(kind: str) -> SearchSpace:
    """The stock search space for each model kind."""
    if kind == "slim":
        dims = (
            Dimension("l1_ratio", "real_log_uniform", 1e-5, 1.0),
            Dimension("alpha", "real_log_uniform", 1e-3, 1.0),
            Dimension("positive_only", "categorical", choices=(True, False)),
            Dimension("top_k", "int_uniform", 5, 800),
        )
    elif kind == "ials":
        dims = (
            Dimension("confidence_scaling", "categorical", choices=(True, False)),
            Dimension("n_factors", "int_uniform", 1, 200),
            Dimension("alpha", "real_log_uniform", 1e-3, 50.0),
            Dimension("epsilon", "real_log_uniform", 1e-3, 10.0),
            Dimension("regularization", "real_log_uniform", 1e-5, 1e-2),
        )
    elif kind == "itemknn":
        dims = (
            Dimension("top_k", "int_uniform", 1, 200),
            Dimension("shrink", "int_uniform", 0, 600),
            Dimension(
                "similarity",
                "categorical",
                choices=("cosine", "jaccard", "asymmetric", "dice", "tversky"),
            ),
        )
    elif kind == "popularity":
        dims = ()  # baseline has nothing to search
    elif kind == "multivae":
        raise ConfigError(
            "multivae is a neural model and out of scope for this package"
        )
    else:
        raise ConfigError(f"no search space for unknown model kind {kind!r}")
    return SearchSpace(kind, dims)


def sample_params(space: SearchSpace, rng: np.random.Generator) -> dict:
    """Draw one assignment, every dimension sampled independently."""
    params = {}
    for dim in space.dimensions:
        if dim.kind == "real_uniform":
            params[dim.name] = float(rng.uniform(dim.low, dim.high))
        elif dim.kind == "real_log_uniform":
            params[dim.name] = float(
                np.exp(rng.uniform(np.log(dim.low), np.log(dim.high)))
            )
        elif dim.kind == "int_uniform":
            params[dim.name] = int(rng.integers(int(dim.low), int(dim.high) + 1))
        else:
            params[dim.name] = dim.choices[int(rng.integers(len(dim.choices)))]
    return params


def tune(
    kind: str,
    space: SearchSpace,
    train,
    valid: InteractionLog,
    *,
    n_trials: int = 25,
    seed: int = 0,
    k: int = SELECTION_K,
) -> TuneResult:
    """Random search over ``space``; selection score is NDCG@k on ``valid``.

    Trials whose fit blows up numerically are recorded as failed and skipped
    in the argmax; ties on the best score go to the lowest trial index.
    """
    if n_trials < 1:
        raise ConfigError("n_trials must be >= 1")
    rng = np.random.default_rng(seed)
    assignments = [sample_params(space, rng) for _ in range(n_trials)]

    trials = []
    best_index = None
    best_score = -np.inf
    for index, params in enumerate(assignments):
        start = time.perf_counter()
        try:
            model = make_recommender(kind, params, random_state=derive_seed(seed, "trial", index))
            model.fit(train)
            outcomes = evaluate_ranking(model, train, valid, ks=(k,))
            score = outcome_value(outcomes, SELECTION_METRIC, k)
        except (FitError, FloatingPointError, np.linalg.LinAlgError) as exc:
            trials.append(
                TrialRecord(index, params, None, time.perf_counter() - start, True, str(exc))
            )
            continue
        trials.append(TrialRecord(index, params, score, time.perf_counter() - start))
        if score > best_score:
            best_score = score
            best_index = index

    if best_index is None:
        raise FitError(f"all {n_trials} trials failed for model {kind!r}")
    return TuneResult(
        best_params=dict(assignments[best_index]),
        best_score=float(best_score),
        best_index=best_index,
        trials=tuple(trials),
    )


def trials_to_csv(trials) -> str:
    """Serialize a trial log; params become flat sorted-key JSON."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "params", "score", "seconds", "failed"])
    for t in trials:
        score = "" if t.score is None else repr(t.score)
        writer.writerow(
            [t.index, json.dumps(t.params, sort_keys=True), score, repr(t.seconds), int(t.failed)]
        )
    return buf.getvalue()
