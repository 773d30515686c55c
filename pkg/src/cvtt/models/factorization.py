"""Implicit-feedback matrix factorization via alternating least squares.

Observed entries get preference 1 and a confidence grown from the interaction
weight, either linearly (1 + alpha*r) or logarithmically
(1 + alpha*ln(1 + r/epsilon)); unobserved entries keep preference 0 at
confidence 1. User and item factors alternate through closed-form ridge
solves, which makes the weighted objective nonincreasing per half-sweep.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from ..errors import FitError
from .base import BaseRecommender, validate_interactions


def _solve_side(conf: sparse.csr_matrix, other: np.ndarray, reg: float) -> np.ndarray:
    """Closed-form ridge update for one side; ``conf`` holds c-1 on nonzeros."""
    n_rows = conf.shape[0]
    n_factors = other.shape[1]
    gram = other.T @ other + reg * np.eye(n_factors)
    out = np.zeros((n_rows, n_factors))
    for r in range(n_rows):
        lo, hi = conf.indptr[r], conf.indptr[r + 1]
        if lo == hi:
            continue  # no observations: the ridge solution is exactly zero
        cols = conf.indices[lo:hi]
        w = conf.data[lo:hi]
        M = other[cols]
        A = gram + M.T @ (M * w[:, None])
        b = M.T @ (w + 1.0)
        out[r] = np.linalg.solve(A, b)
    return out


def _objective(U, V, rows, cols, conf_minus1, reg) -> float:
    """Confidence-weighted squared error over all user-item pairs, plus ridge."""
    x = np.einsum("ij,ij->i", U[rows], V[cols])
    observed = np.sum((1.0 + conf_minus1) * (1.0 - x) ** 2 - x**2)
    quad = np.sum((U @ (V.T @ V)) * U)
    return float(observed + quad + reg * (np.sum(U * U) + np.sum(V * V)))


class ImplicitALS(BaseRecommender):
    """Confidence-weighted matrix factorization for implicit feedback."""

    kind = "ials"

    def __init__(
        self,
        n_factors: int = 10,
        alpha: float = 1.0,
        regularization: float = 1e-2,
        confidence_scaling: bool = False,
        epsilon: float = 1.0,
        n_sweeps: int = 15,
        tol: float = 1e-5,
        random_state: int = 0,
    ):
        self.n_factors = n_factors
        self.alpha = alpha
        self.regularization = regularization
        self.confidence_scaling = confidence_scaling
        self.epsilon = epsilon
        self.n_sweeps = n_sweeps
        self.tol = tol
        self.random_state = random_state

    def _validate_params_(self):
        if self.n_factors < 1:
            raise ValueError("n_factors must be >= 1")
        if self.alpha <= 0 or self.regularization <= 0 or self.epsilon <= 0:
            raise ValueError("alpha, regularization and epsilon must be positive")
        if self.n_sweeps < 1:
            raise ValueError("n_sweeps must be >= 1")

    def fit(self, X, y=None):
        self._validate_params_()
        R = validate_interactions(X)
        n_users, n_items = R.shape

        conf = R.copy()
        if self.confidence_scaling:
            conf.data = self.alpha * np.log1p(conf.data / self.epsilon)
        else:
            conf.data = self.alpha * conf.data
        conf_t = conf.T.tocsr()
        coo = conf.tocoo()

        rng = np.random.default_rng(self.random_state)
        scale = 1.0 / np.sqrt(self.n_factors)
        U = rng.random((n_users, self.n_factors)) * scale
        V = rng.random((n_items, self.n_factors)) * scale

        history = []
        prev_full = None
        for sweep in range(self.n_sweeps):
            U = _solve_side(conf, V, self.regularization)
            if not np.isfinite(U).all():
                raise FitError(f"non-finite user factors during sweep {sweep}")
            history.append(_objective(U, V, coo.row, coo.col, coo.data, self.regularization))

            V = _solve_side(conf_t, U, self.regularization)
            if not np.isfinite(V).all():
                raise FitError(f"non-finite item factors during sweep {sweep}")
            history.append(_objective(U, V, coo.row, coo.col, coo.data, self.regularization))

            full = history[-1]
            if not np.isfinite(full):
                raise FitError(f"non-finite objective during sweep {sweep}")
            if prev_full is not None and prev_full - full < self.tol * max(abs(prev_full), 1.0):
                break
            prev_full = full

        self.user_factors_ = U
        self.item_factors_ = V
        self.objective_history_ = tuple(history)
        self.n_users_, self.n_items_ = n_users, n_items
        return self

    def _score(self, user):
        return self.user_factors_[user] @ self.item_factors_.T
