import numpy as np
import pytest

from sparselab.linalg import Dataset, standardize


def random_data(n, p, seed=0, s=3, noise=1.0, rho=0.0):
    """Standardized Gaussian design with a sparse linear signal."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    if rho:
        x = x + rho * rng.standard_normal((n, 1))
    beta = np.zeros(p)
    beta[: min(s, p)] = rng.choice([-2.0, -1.0, 1.0, 2.0], size=min(s, p))
    y = x @ beta + noise * rng.standard_normal(n)
    return standardize(Dataset(x, y))


def orthonormal_data(n, p, seed=0):
    """Columns with mean 0, sd 1 and exactly orthogonal, so X^T X / n = (n-1)/n I."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, p))
    # QR of centered columns stays in their span, hence centered too
    q, _ = np.linalg.qr(z - z.mean(axis=0))
    x = q * np.sqrt(n - 1)
    y = x @ rng.normal(0, 1.5, p) + rng.standard_normal(n)
    y = y - y.mean()
    return standardize(Dataset(x, y))


@pytest.fixture
def small_data():
    return random_data(60, 8, seed=1)
