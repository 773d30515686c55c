"""Item-based nearest-neighbour recommender.

Scores are the user's interaction row times a truncated item-item similarity
matrix. Five similarity measures are supported, each with an additive shrink
term damping low-support pairs.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .base import BaseRecommender, validate_interactions

SIMILARITIES = ("cosine", "jaccard", "asymmetric", "dice", "tversky")


def _truncate_rows(mat: sparse.csr_matrix, top_k: int) -> sparse.csr_matrix:
    """Keep the top_k largest values per row, ties broken by ascending column."""
    mat = mat.tocsr()
    rows, cols, vals = [], [], []
    for r in range(mat.shape[0]):
        lo, hi = mat.indptr[r], mat.indptr[r + 1]
        if lo == hi:
            continue
        c = mat.indices[lo:hi]
        v = mat.data[lo:hi]
        order = np.lexsort((c, -v))[:top_k]
        rows.append(np.full(len(order), r, dtype=np.int64))
        cols.append(c[order])
        vals.append(v[order])
    if not rows:
        return sparse.csr_matrix(mat.shape)
    out = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=mat.shape,
    )
    return out.tocsr()


def knn_similarity(
    X,
    *,
    top_k: int,
    shrink: float = 0.0,
    similarity: str = "cosine",
    asymmetric_alpha: float = 0.5,
    tversky_alpha: float = 1.0,
    tversky_beta: float = 1.0,
) -> sparse.csr_matrix:
    """Item-item similarity matrix with zero diagonal and per-row truncation.

    Set measures (jaccard, dice, tversky) work on column supports; cosine and
    asymmetric cosine use the weighted columns. 0/0 is defined as 0.
    """
    if similarity not in SIMILARITIES:
        raise ValueError(f"similarity must be one of {SIMILARITIES}")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if shrink < 0:
        raise ValueError("shrink must be >= 0")
    if not 0.0 < asymmetric_alpha < 1.0:
        raise ValueError("asymmetric_alpha must be in (0, 1)")
    if tversky_alpha < 0 or tversky_beta < 0:
        raise ValueError("tversky coefficients must be >= 0")

    A = validate_interactions(X)
    if similarity in ("cosine", "asymmetric"):
        co = (A.T @ A).tocoo()
        norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=0)).ravel())
        numer = co.data
        if similarity == "cosine":
            denom = norms[co.row] * norms[co.col] + shrink
        else:
            a = asymmetric_alpha
            denom = norms[co.row] ** (2 * a) * norms[co.col] ** (2 * (1 - a)) + shrink
    else:
        B = A.copy()
        B.data = np.ones_like(B.data)
        co = (B.T @ B).tocoo()
        support = np.asarray(B.sum(axis=0)).ravel()
        inter = co.data
        ni, nj = support[co.row], support[co.col]
        numer = inter
        if similarity == "jaccard":
            denom = ni + nj - inter + shrink
        elif similarity == "dice":
            numer = 2.0 * inter
            denom = ni + nj + shrink
        else:  # tversky
            denom = (
                inter
                + tversky_alpha * (ni - inter)
                + tversky_beta * (nj - inter)
                + shrink
            )

    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(denom > 0, numer / denom, 0.0)
    off_diag = co.row != co.col
    sim = sparse.coo_matrix(
        (values[off_diag], (co.row[off_diag], co.col[off_diag])),
        shape=(A.shape[1], A.shape[1]),
    ).tocsr()
    sim.eliminate_zeros()
    return _truncate_rows(sim, top_k)


class ItemKNN(BaseRecommender):
    """Neighbourhood model: score(u) = interactions(u) . similarity."""

    kind = "itemknn"

    def __init__(
        self,
        top_k: int = 100,
        shrink: float = 0.0,
        similarity: str = "cosine",
        asymmetric_alpha: float = 0.5,
        tversky_alpha: float = 1.0,
        tversky_beta: float = 1.0,
    ):
        self.top_k = top_k
        self.shrink = shrink
        self.similarity = similarity
        self.asymmetric_alpha = asymmetric_alpha
        self.tversky_alpha = tversky_alpha
        self.tversky_beta = tversky_beta

    def fit(self, X, y=None):
        X = validate_interactions(X)
        self.similarity_ = knn_similarity(
            X,
            top_k=self.top_k,
            shrink=self.shrink,
            similarity=self.similarity,
            asymmetric_alpha=self.asymmetric_alpha,
            tversky_alpha=self.tversky_alpha,
            tversky_beta=self.tversky_beta,
        )
        self.interactions_ = X
        self.n_users_, self.n_items_ = X.shape
        return self

    def _score(self, user):
        return np.asarray((self.interactions_[user] @ self.similarity_).todense()).ravel()
