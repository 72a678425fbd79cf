import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def gauss_rank(rows, tol=1e-9):
    """Rank by Gaussian elimination with partial pivoting (independent of SVD)."""
    a = np.array(rows, dtype=float)
    if a.size == 0:
        return 0
    scale = np.max(np.abs(a))
    if scale == 0:
        return 0
    a = a / scale
    rank, col = 0, 0
    r, c = a.shape
    while rank < r and col < c:
        piv = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[piv, col]) <= tol:
            col += 1
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank + 1 :] -= np.outer(a[rank + 1 :, col] / a[rank, col], a[rank])
        rank += 1
        col += 1
    return rank


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
