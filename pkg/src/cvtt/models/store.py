"""Versioned JSON dumps of fitted models, for caching between folds.

Layout: ``{"format": "cvtt-recommender", "version": 1, "kind": ..., "params":
get_params(), "state": {...}}`` where sparse matrices are stored as sorted
(row, col, value) triples and dense factors as nested lists. Being JSON text,
the format has no endianness concerns and diffs cleanly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy import sparse

from ..errors import DataError

FORMAT_NAME = "cvtt-recommender"
FORMAT_VERSION = 1


def _sparse_to_dict(mat) -> dict:
    coo = mat.tocoo()
    order = np.lexsort((coo.col, coo.row))
    return {
        "shape": [int(s) for s in coo.shape],
        "row": coo.row[order].tolist(),
        "col": coo.col[order].tolist(),
        "value": coo.data[order].tolist(),
    }


def _sparse_from_dict(d) -> sparse.csr_matrix:
    return sparse.coo_matrix(
        (d["value"], (d["row"], d["col"])), shape=tuple(d["shape"])
    ).tocsr()


def _state(model) -> dict:
    kind = model.kind
    if kind == "itemknn":
        return {
            "similarity": _sparse_to_dict(model.similarity_),
            "interactions": _sparse_to_dict(model.interactions_),
        }
    if kind == "slim":
        return {
            "weights": _sparse_to_dict(model.weights_),
            "interactions": _sparse_to_dict(model.interactions_),
        }
    if kind == "ials":
        return {
            "user_factors": model.user_factors_.tolist(),
            "item_factors": model.item_factors_.tolist(),
            "objective_history": list(model.objective_history_),
        }
    if kind == "popularity":
        return {
            "item_counts": model.item_counts_.tolist(),
            "n_users": int(model.n_users_),
        }
    raise ValueError(f"cannot serialize model kind {kind!r}")


def save_model(model, path) -> None:
    """Write a fitted model to a JSON dump at ``path``."""
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": model.kind,
        "params": model.get_params(),
        "state": _state(model),
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_model(path):
    """Rebuild a fitted model from a dump written by :func:`save_model`."""
    from . import make_recommender  # deferred: avoids a circular import

    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model dump {path}: {exc}") from exc
    if doc.get("format") != FORMAT_NAME:
        raise DataError(f"{path} is not a recommender dump")
    if doc.get("version") != FORMAT_VERSION:
        raise DataError(f"unsupported dump version {doc.get('version')}")

    model = make_recommender(doc["kind"], doc["params"])
    state = doc["state"]
    if doc["kind"] == "itemknn":
        model.similarity_ = _sparse_from_dict(state["similarity"])
        model.interactions_ = _sparse_from_dict(state["interactions"])
        model.n_users_, model.n_items_ = model.interactions_.shape
    elif doc["kind"] == "slim":
        model.weights_ = _sparse_from_dict(state["weights"])
        model.interactions_ = _sparse_from_dict(state["interactions"])
        model.n_users_, model.n_items_ = model.interactions_.shape
    elif doc["kind"] == "ials":
        model.user_factors_ = np.asarray(state["user_factors"], dtype=np.float64)
        model.item_factors_ = np.asarray(state["item_factors"], dtype=np.float64)
        model.objective_history_ = tuple(state["objective_history"])
        model.n_users_ = model.user_factors_.shape[0]
        model.n_items_ = model.item_factors_.shape[0]
    else:  # popularity
        model.item_counts_ = np.asarray(state["item_counts"], dtype=np.float64)
        model.n_users_ = int(state["n_users"])
        model.n_items_ = len(model.item_counts_)
    return model
