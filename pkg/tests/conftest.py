import numpy as np
import pytest

from mdslogit.model import Dataset, sigmoid


def make_dataset(n, p, seed=0, scale=1.0, beta=None):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    if beta is None:
        beta = rng.normal(size=p) * scale / np.sqrt(p)
    y = (rng.random(n) < sigmoid(x @ beta)).astype(float)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return Dataset(x, y)


@pytest.fixture
def small_ds():
    return make_dataset(40, 6, seed=3, scale=2.0)
