import numpy as np
import pytest
from scipy import sparse

from cvtt.ingest import InteractionLog


def make_log(records, n_users=None, n_items=None):
    """Build a log from (user, item, timestamp[, weight]) tuples."""
    rows = [tuple(r) if len(r) == 4 else (*r, 1.0) for r in records]
    rows.sort(key=lambda r: r[2])
    users = np.array([r[0] for r in rows], dtype=np.int64)
    items = np.array([r[1] for r in rows], dtype=np.int64)
    stamps = np.array([r[2] for r in rows], dtype=np.int64)
    weights = np.array([r[3] for r in rows], dtype=np.float64)
    n_users = n_users if n_users is not None else int(users.max()) + 1
    n_items = n_items if n_items is not None else int(items.max()) + 1
    return InteractionLog(
        users=users,
        items=items,
        timestamps=stamps,
        weights=weights,
        user_vocab={u: u for u in range(n_users)},
        item_vocab={i: i for i in range(n_items)},
    )


def random_matrix(n_users, n_items, density=0.2, seed=0, binary=False):
    rng = np.random.default_rng(seed)
    mat = sparse.random(
        n_users, n_items, density=density, random_state=rng,
        data_rvs=lambda n: np.ones(n) if binary else rng.integers(1, 5, n).astype(float),
    ).tocsr()
    mat.eliminate_zeros()
    return mat


@pytest.fixture
def toy_log():
    # 3 periods of 100 seconds, every user active in every period
    return make_log(
        [
            (0, 0, 10), (0, 1, 20), (1, 0, 30), (1, 2, 40), (2, 1, 50), (2, 2, 60),
            (0, 2, 110), (0, 0, 120), (1, 1, 130), (2, 0, 140), (1, 0, 150), (2, 2, 160),
            (0, 1, 210), (1, 2, 220), (2, 0, 230), (0, 0, 240), (1, 1, 250), (2, 1, 260),
        ]
    )
