"""Logistic model primitives: link, likelihood, score and sample splitting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    """Raised for malformed or degenerate datasets."""


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        if x.ndim != 2:
            raise DataError("x must be a 2-D array")
        n, p = x.shape
        if n < 2 or p < 2:
            raise DataError(f"need n >= 2 and p >= 2, got n={n}, p={p}")
        if y.shape[0] != n:
            raise DataError(f"y has length {y.shape[0]} but x has {n} rows")
        if not np.all(np.isfinite(x)):
            raise DataError("x contains non-finite entries")
        bad = np.flatnonzero((y != 0.0) & (y != 1.0))
        if bad.size:
            raise DataError(f"y must be 0/1; row {int(bad[0])} has value {y[bad[0]]!r}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def subset(self, rows) -> "Dataset":
        return Dataset(self.x[rows], self.y[rows])


@dataclass(frozen=True)
class SplitDataset:
    d1: Dataset
    d2: Dataset
    split_seed: int
    idx1: np.ndarray
    idx2: np.ndarray


@dataclass(frozen=True)
class Coefficients:
    """A coefficient vector viewed as (tested coordinate, nuisance block)."""

    beta: np.ndarray
    tested_index: int = 0

    @property
    def beta_star(self) -> float:
        return float(self.beta[self.tested_index])

    @property
    def theta_star(self) -> np.ndarray:
        return np.delete(self.beta, self.tested_index)


def sigmoid(u):
    """Logistic function e^u / (1 + e^u), overflow free for any finite input."""
    u = np.asarray(u, dtype=float)
    # exp(-|u|) never overflows; pick the branch by sign without masking.
    e = np.exp(-np.abs(u))
    out = np.where(u >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return out if out.ndim else float(out)


def dsigmoid(u):
    s = sigmoid(u)
    return s * (1.0 - s) if np.ndim(s) else float(s * (1.0 - s))


def _check_beta(ds: Dataset, beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.shape[0] != ds.p:
        raise ValueError(f"beta has length {beta.shape[0]}, dataset has p={ds.p}")
    return beta


def log1pexp(u):
    """Stable log(1 + e^u)."""
    u = np.asarray(u, dtype=float)
    return np.maximum(u, 0.0) + np.log1p(np.exp(-np.abs(u)))


def neg_log_likelihood(ds: Dataset, beta) -> float:
    """Average logistic loss (1/n) sum[-y_i u_i + log(1 + e^{u_i})], u = X beta."""
    beta = _check_beta(ds, beta)
    u = ds.x @ beta
    return float(np.mean(log1pexp(u) - ds.y * u))


def logistic_score(x: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """(1/n) X'(f(X beta) - y) on raw arrays; ``y`` may hold probabilities."""
    return x.T @ (sigmoid(x @ beta) - y) / x.shape[0]


def nll_gradient(ds: Dataset, beta) -> np.ndarray:
    beta = _check_beta(ds, beta)
    return logistic_score(ds.x, ds.y, beta)


def split_samples(ds: Dataset, fraction: float = 0.5, seed: int = 0) -> SplitDataset:
    """Random partition into an estimation half ``d1`` and an inference half ``d2``.

    ``d1`` receives ``floor(fraction * n)`` rows. Both sides must keep at least
    two observations.
    """
    if not 0.0 < fraction < 1.0:
        raise DataError(f"split fraction must lie in (0, 1), got {fraction}")
    n1 = int(np.floor(fraction * ds.n))
    if n1 < 2 or ds.n - n1 < 2:
        raise DataError(f"degenerate split: n={ds.n}, fraction={fraction} gives {n1}/{ds.n - n1}")
    perm = np.random.Generator(np.random.Philox(seed)).permutation(ds.n)
    idx1 = np.sort(perm[:n1])
    idx2 = np.sort(perm[n1:])
    return SplitDataset(ds.subset(idx1), ds.subset(idx2), seed, idx1, idx2)
