import math
import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdslogit.model import (DataError, Dataset, dsigmoid, logistic_score, neg_log_likelihood,
                            nll_gradient, sigmoid, split_samples)

from conftest import make_dataset


def test_sigmoid_examples():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(3.7) + sigmoid(-3.7) == pytest.approx(1.0, abs=1e-15)
    exact = 1 / (1 + mpmath.exp(mpmath.mpf(-50)))
    assert abs(sigmoid(50.0) - float(exact)) <= 1e-15
    assert abs(sigmoid(50.0) - 1.0) <= 1e-15


def test_sigmoid_no_overflow():
    with np.errstate(over="raise"):
        vals = sigmoid(np.array([-700.0, -50.0, 50.0, 700.0]))
    assert np.all(np.isfinite(vals))
    assert vals[0] >= 0 and vals[-1] <= 1


@given(st.floats(min_value=-8, max_value=3))
def test_sigmoid_symmetry(log10u):
    u = 10.0 ** log10u
    assert abs(sigmoid(u) + sigmoid(-u) - 1.0) <= 1e-15


def test_dsigmoid_examples():
    assert dsigmoid(0.0) == 0.25
    h = 1e-5
    fd = (sigmoid(2 + h) - sigmoid(2 - h)) / (2 * h)
    assert abs(dsigmoid(2.0) - fd) <= 1e-8
    assert dsigmoid(1.3) == dsigmoid(-1.3)


@given(st.floats(min_value=-30, max_value=30))
def test_dsigmoid_matches_finite_difference(u):
    h = 1e-5
    fd = (sigmoid(u + h) - sigmoid(u - h)) / (2 * h)
    assert abs(dsigmoid(u) - fd) <= 1e-7
    assert 0 < dsigmoid(u) <= 0.25


def test_nll_examples():
    ds = make_dataset(12, 3, seed=1)
    assert neg_log_likelihood(ds, np.zeros(3)) == pytest.approx(math.log(2), abs=1e-15)
    one = Dataset(np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([1.0, 1.0]))
    expected = -10 + math.log1p(math.exp(10))
    assert abs(neg_log_likelihood(one, [10.0, 0.0]) - expected) <= 1e-6
    assert expected == pytest.approx(4.54e-5, rel=1e-3)


def test_nll_large_margin_is_stable():
    ds = Dataset(np.array([[800.0, 0.0], [-800.0, 0.0]]), np.array([1.0, 0.0]))
    assert neg_log_likelihood(ds, [1.0, 0.0]) == pytest.approx(0.0, abs=1e-300)
    ds = Dataset(np.array([[800.0, 0.0], [-800.0, 0.0]]), np.array([0.0, 1.0]))
    assert neg_log_likelihood(ds, [1.0, 0.0]) == pytest.approx(800.0)


def _fd_grad(ds, beta, h=1e-6):
    g = np.zeros_like(beta)
    for j in range(beta.size):
        e = np.zeros_like(beta)
        e[j] = h
        g[j] = (neg_log_likelihood(ds, beta + e) - neg_log_likelihood(ds, beta - e)) / (2 * h)
    return g


def test_gradient_examples():
    x = np.column_stack([np.ones(6), np.arange(6.0)])
    y = np.array([1, 0, 1, 0, 1, 0.0])
    assert nll_gradient(Dataset(x, y), np.zeros(2))[0] == 0.0
    ds = make_dataset(5, 3, seed=11)
    beta = np.array([0.3, -0.8, 1.1])
    np.testing.assert_allclose(nll_gradient(ds, beta), _fd_grad(ds, beta), rtol=1e-6, atol=1e-9)


def test_gradient_zero_when_y_equals_probabilities():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(8, 3))
    beta = rng.normal(size=3)
    np.testing.assert_array_equal(logistic_score(x, sigmoid(x @ beta), beta), np.zeros(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 50), st.integers(2, 10), st.integers(0, 10_000))
def test_gradient_matches_finite_differences(n, p, seed):
    ds = make_dataset(n, p, seed=seed)
    beta = np.random.default_rng(seed + 1).normal(size=p)
    g = nll_gradient(ds, beta)
    fd = _fd_grad(ds, beta)
    assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(g)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_nll_convex_along_segments(seed):
    rng = np.random.default_rng(seed)
    ds = make_dataset(30, 5, seed=seed)
    a, b = rng.normal(size=5) * 2, rng.normal(size=5) * 2
    mid = neg_log_likelihood(ds, (a + b) / 2)
    assert mid <= (neg_log_likelihood(ds, a) + neg_log_likelihood(ds, b)) / 2 + 1e-12


def test_dimension_mismatch():
    ds = make_dataset(5, 3)
    with pytest.raises(ValueError):
        neg_log_likelihood(ds, np.zeros(2))
    with pytest.raises(ValueError):
        nll_gradient(ds, np.zeros(4))


def test_dataset_validation():
    with pytest.raises(DataError, match="row 1"):
        Dataset(np.ones((3, 2)), [0, 2, 1])
    with pytest.raises(DataError):
        Dataset(np.array([[1.0, np.nan], [0, 1]]), [0, 1])
    with pytest.raises(DataError):
        Dataset(np.ones((1, 2)), [1])
    with pytest.raises(DataError):
        Dataset(np.ones((3, 1)), [0, 1, 0])


def test_split_samples():
    ds = make_dataset(10, 3)
    a, b = split_samples(ds, 0.5, 7), split_samples(ds, 0.5, 7)
    assert np.array_equal(a.idx1, b.idx1) and np.array_equal(a.d2.x, b.d2.x)
    assert a.d1.n == 5 and a.d2.n == 5
    big = make_dataset(101, 3)
    sp = split_samples(big, 0.5, 3)
    assert sp.d1.n == 50
    assert set(sp.idx1) | set(sp.idx2) == set(range(101))
    assert not set(sp.idx1) & set(sp.idx2)
    assert sp.d1.p == sp.d2.p == 3
    np.testing.assert_array_equal(sp.d2.x, big.x[sp.idx2])


def test_split_degenerate():
    ds = make_dataset(4, 2)
    with pytest.raises(DataError):
        split_samples(ds, 0.2, 0)
    with pytest.raises(DataError):
        split_samples(ds, 1.0, 0)
