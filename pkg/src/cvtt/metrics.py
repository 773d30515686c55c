"""Ranked-list evaluation: NDCG, recall and hit rate at a cutoff.

All metrics use binary relevance. NDCG discounts position p by 1/log2(p+1)
and normalizes by the ideal ranking truncated at min(k, |relevant|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DataError
from .ingest import InteractionLog

METRIC_NAMES = ("ndcg", "recall", "hitrate")


@dataclass(frozen=True)
class EvalOutcome:
    """Mean of one metric at one cutoff over the eligible users.

    ``n_users_skipped_cold`` counts test users that could not be evaluated,
    either because they have no train/valid history or because every test
    item was already seen.
    """

    metric: str
    k: int
    mean: float
    n_users_evaluated: int
    n_users_skipped_cold: int


def ndcg_at_k(ranked, relevant, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be nonempty")
    dcg = 0.0
    for pos, item in enumerate(ranked[:k], start=1):
        if item in relevant:
            dcg += 1.0 / math.log2(pos + 1)
    ideal = sum(1.0 / math.log2(pos + 1) for pos in range(1, min(k, len(relevant)) + 1))
    return dcg / ideal


def recall_at_k(ranked, relevant, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be nonempty")
    hits = sum(1 for item in ranked[:k] if item in relevant)
    return hits / len(relevant)


def hitrate_at_k(ranked, relevant, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be nonempty")
    return 1.0 if any(item in relevant for item in ranked[:k]) else 0.0


_METRIC_FUNCS = {"ndcg": ndcg_at_k, "recall": recall_at_k, "hitrate": hitrate_at_k}


def evaluate_ranking(model, seen, test: InteractionLog, ks=(10,)) -> list[EvalOutcome]:
    """Evaluate a fitted model's rankings against a test log.

    ``seen`` is the users x items matrix of train+valid interactions; its
    rows define both the recommendation exclusion set and the novelty filter
    on relevance. Users without history, or whose test items were all seen,
    are skipped and counted.
    """
    seen = sparse.csr_matrix(seen)
    if seen.shape[1] != test.n_items:
        raise DataError(
            f"seen matrix has {seen.shape[1]} items but the test log has {test.n_items}"
        )
    if getattr(model, "n_items_", test.n_items) != test.n_items:
        raise DataError("model was fitted on a different item vocabulary")
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("cutoffs must be positive integers")
    kmax = ks[-1]

    order = np.argsort(test.users, kind="stable")
    users_sorted = test.users[order]
    boundaries = np.flatnonzero(np.diff(users_sorted)) + 1
    groups = np.split(order, boundaries) if len(order) else []

    values: dict[tuple[str, int], list[float]] = {
        (m, k): [] for m in METRIC_NAMES for k in ks
    }
    n_cold = 0
    for group in groups:
        user = int(test.users[group[0]])
        seen_idx = seen.indices[seen.indptr[user]:seen.indptr[user + 1]]
        if len(seen_idx) == 0:
            n_cold += 1
            continue
        relevant = set(test.items[group].tolist()) - set(seen_idx.tolist())
        if not relevant:
            n_cold += 1
            continue
        ranked = model.recommend(user, kmax, exclude=seen_idx)
        for k in ks:
            for name in METRIC_NAMES:
                values[(name, k)].append(_METRIC_FUNCS[name](ranked, relevant, k))

    n_eval = len(values[(METRIC_NAMES[0], ks[0])])
    if n_eval == 0:
        raise DataError("no eligible users to evaluate")
    return [
        EvalOutcome(name, k, float(np.mean(values[(name, k)])), n_eval, n_cold)
        for name in METRIC_NAMES
        for k in ks
    ]


def outcome_value(outcomes, metric: str, k: int) -> float:
    for out in outcomes:
        if out.metric == metric and out.k == k:
            return out.mean
    raise KeyError(f"no outcome for {metric}@{k}")


def outcomes_to_csv(outcomes) -> str:
    lines = ["metric,k,mean,n_eval,n_cold"]
    for out in outcomes:
        lines.append(
            f"{out.metric},{out.k},{out.mean!r},"
            f"{out.n_users_evaluated},{out.n_users_skipped_cold}"
        )
    return "\n".join(lines) + "\n"
