import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdslogit.linearize import linearize, rebuild_v
from mdslogit.model import dsigmoid, sigmoid

from conftest import make_dataset


def test_zero_pilot():
    ds = make_dataset(12, 4, seed=1)
    ld = linearize(ds, np.zeros(4), 0, 0.0)
    np.testing.assert_array_equal(ld.x_new(), 0.25 * ds.x)
    np.testing.assert_array_equal(ld.y_new, ds.y - 0.5)
    np.testing.assert_array_equal(ld.v, ld.y_new)


def test_identity_random_instance():
    ds = make_dataset(10, 4, seed=2)
    beta = np.random.default_rng(0).normal(size=4)
    ld = linearize(ds, beta, 2, 0.7)
    u = ds.x @ beta
    gap = ld.y_new - ld.x_new() @ beta - (ds.y - sigmoid(u))
    assert np.max(np.abs(gap)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 50), st.integers(2, 20), st.floats(-3, 3), st.integers(0, 10_000))
def test_linearization_identities(n, p, beta0, seed):
    ds = make_dataset(n, p, seed=seed)
    rng = np.random.default_rng(seed)
    beta = rng.normal(size=p)
    k = int(rng.integers(p))
    ld = linearize(ds, beta, k, beta0)
    u = ds.x @ beta
    assert np.max(np.abs(ld.y_new - ld.x_new() @ beta - (ds.y - sigmoid(u)))) <= 1e-12
    assert np.max(np.abs(ld.v + ld.z * beta0 - ld.y_new)) <= 1e-14
    # z re-inserted at the tested position reproduces X_new
    np.testing.assert_array_equal(np.insert(ld.w, k, ld.z, axis=1), dsigmoid(u)[:, None] * ds.x)
    assert np.all(np.isfinite(ld.v)) and np.all(np.isfinite(ld.w))


def test_rebuild_v():
    ds = make_dataset(15, 5, seed=3)
    ld = linearize(ds, np.full(5, 0.2), 1, 0.3)
    assert rebuild_v(ld, 0.3) is ld
    np.testing.assert_array_equal(rebuild_v(ld, 0.0).v, ld.y_new)
    a, b = rebuild_v(ld, 0.3), rebuild_v(ld, -0.2)
    np.testing.assert_allclose(a.v - b.v, (-0.2 - 0.3) * ld.z, atol=1e-15)
    assert b.beta0 == -0.2
    np.testing.assert_array_equal(b.w, ld.w)


def test_errors():
    ds = make_dataset(10, 3)
    with pytest.raises(IndexError):
        linearize(ds, np.zeros(3), 3, 0.0)
    with pytest.raises(ValueError):
        linearize(ds, np.zeros(2), 0, 0.0)
    with pytest.raises(FloatingPointError):
        linearize(ds, np.array([np.inf, 0, 0]), 0, 0.0)
