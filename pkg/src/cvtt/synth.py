"""Deterministic synthetic interaction streams with controllable drift.

Each user draws a fixed number of items per period from that period's
popularity profile; a scenario can switch profiles at a shift period to
simulate a preference change. Timestamps fall uniformly inside each period,
so the stream honors period boundaries by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .ingest import InteractionLog


def harmonic_profile(n_items: int, active: slice | None = None) -> np.ndarray:
    """Weights proportional to 1/(rank+1) over the active items, zero elsewhere."""
    weights = np.zeros(n_items)
    idx = np.arange(n_items)[active if active is not None else slice(None)]
    if len(idx) == 0:
        raise ConfigError("profile has no active items")
    weights[idx] = 1.0 / (np.arange(len(idx)) + 1.0)
    return weights / weights.sum()


@dataclass(frozen=True)
class DriftScenario:
    """Generator settings; ``profiles`` holds one weight row per period."""

    n_users: int
    n_items: int
    n_periods: int
    interactions_per_user: int
    profiles: np.ndarray
    seed: int = 0
    period_seconds: int = 86400

    def __post_init__(self):
        object.__setattr__(self, "profiles", np.asarray(self.profiles, dtype=np.float64))
        if min(self.n_users, self.n_items, self.n_periods, self.interactions_per_user) < 1:
            raise ConfigError("scenario sizes must all be >= 1")
        if self.profiles.shape != (self.n_periods, self.n_items):
            raise ConfigError(
                f"profiles must have shape ({self.n_periods}, {self.n_items}), "
                f"got {self.profiles.shape}"
            )
        if self.profiles.min() < 0:
            raise ConfigError("profile weights must be nonnegative")
        sums = self.profiles.sum(axis=1)
        if not np.allclose(sums, 1.0, atol=1e-9):
            raise ConfigError("each period's profile weights must sum to 1")
        if self.period_seconds < 1:
            raise ConfigError("period_seconds must be >= 1")

    @classmethod
    def with_popularity_shift(
        cls,
        n_users: int,
        n_items: int,
        n_periods: int,
        interactions_per_user: int,
        shift_period: int | None = None,
        seed: int = 0,
        period_seconds: int = 86400,
    ) -> "DriftScenario":
        """Harmonic popularity over the first half of the items, switching to
        the second half at ``shift_period`` (or stationary when None)."""
        half = max(1, n_items // 2)
        before = harmonic_profile(n_items, slice(0, half))
        if shift_period is None:
            profiles = np.tile(harmonic_profile(n_items), (n_periods, 1))
        else:
            if not 0 < shift_period < n_periods:
                raise ConfigError("shift_period must fall strictly inside the grid")
            after = harmonic_profile(n_items, slice(half, n_items))
            profiles = np.array(
                [before if p < shift_period else after for p in range(n_periods)]
            )
        return cls(
            n_users=n_users,
            n_items=n_items,
            n_periods=n_periods,
            interactions_per_user=interactions_per_user,
            profiles=profiles,
            seed=seed,
            period_seconds=period_seconds,
        )


def generate(scenario: DriftScenario) -> InteractionLog:
    """Materialize a scenario into a time-sorted log; deterministic under seed.

    Draws are with replacement and then deduplicated per (user, item, period),
    keeping counts near the configured rate without duplicate ambiguity.
    """
    rng = np.random.default_rng(scenario.seed)
    users, items, stamps = [], [], []
    span = scenario.period_seconds
    for period in range(scenario.n_periods):
        draws = rng.choice(
            scenario.n_items,
            size=(scenario.n_users, scenario.interactions_per_user),
            replace=True,
            p=scenario.profiles[period],
        )
        start = period * span
        for user in range(scenario.n_users):
            chosen = np.unique(draws[user])
            ts = rng.integers(start, start + span, size=len(chosen))
            users.append(np.full(len(chosen), user, dtype=np.int64))
            items.append(chosen.astype(np.int64))
            stamps.append(ts.astype(np.int64))

    users = np.concatenate(users)
    items = np.concatenate(items)
    stamps = np.concatenate(stamps)
    order = np.argsort(stamps, kind="stable")
    return InteractionLog(
        users=users[order],
        items=items[order],
        timestamps=stamps[order],
        weights=np.ones(len(order)),
        user_vocab={u: u for u in range(scenario.n_users)},
        item_vocab={i: i for i in range(scenario.n_items)},
    )
