import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240)


def random_spd(rng, dim, scale=1.0):
    """Random symmetric positive definite matrix with a mild spectrum."""
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    eig = rng.uniform(0.1, scale + 1.0, dim)
    m = (q * eig) @ q.T
    return 0.5 * (m + m.T)
