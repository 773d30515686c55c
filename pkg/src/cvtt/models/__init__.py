"""Recommender estimators behind a single fit/recommend contract."""

from ..errors import ConfigError
from .base import BaseRecommender, rank_topk, validate_interactions
from .factorization import ImplicitALS
from .linear import SLIM
from .neighbors import ItemKNN, knn_similarity
from .popularity import Popularity
from .store import load_model, save_model

MODEL_KINDS = ("itemknn", "ials", "slim", "popularity")

_REGISTRY = {
    "itemknn": ItemKNN,
    "ials": ImplicitALS,
    "slim": SLIM,
    "popularity": Popularity,
}


def make_recommender(kind: str, params=None, random_state=None) -> BaseRecommender:
    """Instantiate a recommender by kind string with sampled or fixed params."""
    if kind not in _REGISTRY:
        raise ConfigError(f"unknown model kind {kind!r}; known kinds: {MODEL_KINDS}")
    kwargs = dict(params or {})
    if kind == "ials" and random_state is not None:
        kwargs.setdefault("random_state", random_state)
    return _REGISTRY[kind](**kwargs)


__all__ = [
    "BaseRecommender",
    "ImplicitALS",
    "ItemKNN",
    "MODEL_KINDS",
    "Popularity",
    "SLIM",
    "knn_similarity",
    "load_model",
    "make_recommender",
    "rank_topk",
    "save_model",
    "validate_interactions",
]
