"""Shared recommender plumbing: input validation, ranking, the estimator base."""

from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted


def validate_interactions(X) -> sparse.csr_matrix:
    """Coerce input to a nonnegative float64 CSR user-item matrix."""
    if not sparse.issparse(X):
        X = sparse.csr_matrix(np.asarray(X, dtype=np.float64))
    X = X.tocsr().astype(np.float64)
    if X.ndim != 2:
        raise ValueError("interaction matrix must be 2-dimensional")
    if X.nnz and X.data.min() < 0:
        raise ValueError("interaction matrix must be nonnegative")
    X.sum_duplicates()
    X.eliminate_zeros()
    return X


def rank_topk(scores: np.ndarray, k: int, exclude=()) -> list[int]:
    """Top-k item ids by descending score, ties broken by ascending id.

    Excluded items never appear; fewer than k items come back only when
    fewer remain after exclusion.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    s = np.asarray(scores, dtype=np.float64).copy()
    excl = np.asarray(list(exclude), dtype=np.int64)
    if excl.size:
        s[excl] = -np.inf
    order = np.lexsort((np.arange(len(s)), -s))
    out = []
    for idx in order[:k]:
        if s[idx] == -np.inf:
            break
        out.append(int(idx))
    return out


class BaseRecommender(BaseEstimator):
    """fit/recommend contract shared by every model.

    Subclasses set ``n_users_``/``n_items_`` plus their own fitted state in
    ``fit`` and implement ``_score``. A fitted model is immutable and safe to
    share across threads.
    """

    kind = "base"

    def fit(self, X, y=None):
        raise NotImplementedError

    def score_user(self, user: int) -> np.ndarray:
        """Dense score vector over all items for one user."""
        check_is_fitted(self)
        if not 0 <= user < self.n_users_:
            raise ValueError(f"unknown user id {user} (fitted on {self.n_users_} users)")
        return self._score(int(user))

    def recommend(self, user: int, k: int, exclude=()) -> list[int]:
        """Ranked top-k item ids for a user, never recommending ``exclude``."""
        return rank_topk(self.score_user(user), k, exclude)

    def _score(self, user: int) -> np.ndarray:
        raise NotImplementedError
