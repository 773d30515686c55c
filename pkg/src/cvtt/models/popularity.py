"""Non-personalized popularity baseline: every user gets the global item counts."""

from __future__ import annotations

import numpy as np

from .base import BaseRecommender, validate_interactions


class Popularity(BaseRecommender):
    kind = "popularity"

    def fit(self, X, y=None):
        X = validate_interactions(X)
        self.item_counts_ = np.asarray(X.sum(axis=0)).ravel()
        self.n_users_, self.n_items_ = X.shape
        return self

    def _score(self, user):
        return self.item_counts_.copy()
