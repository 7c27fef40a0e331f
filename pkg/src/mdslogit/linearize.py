"""Pseudo-linear reconstruction of the logistic model around a pilot fit.

With u_hat = X beta_hat the first-order expansion of the link turns the
logistic model into an approximate linear one,

    y_new = y - f(u_hat) + f'(u_hat) u_hat,     X_new = f'(u_hat) X,

with the Taylor remainder dropped (it is unobservable and is left inside the
error term). The tested column of ``X_new`` becomes ``z``, the rest ``w``,
and ``v = y_new - z * beta0`` is the pseudo-response under the null.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import Dataset, dsigmoid, sigmoid


@dataclass(frozen=True)
class LinearizedData:
    v: np.ndarray
    z: np.ndarray
    w: np.ndarray
    beta0: float
    y_new: np.ndarray
    tested_index: int = 0

    @property
    def n(self) -> int:
        return self.v.shape[0]

    def x_new(self) -> np.ndarray:
        return np.insert(self.w, self.tested_index, self.z, axis=1)


def linearize(d2: Dataset, beta_hat, tested_index: int = 0, beta0: float = 0.0) -> LinearizedData:
    beta_hat = np.asarray(beta_hat, dtype=float).ravel()
    if beta_hat.shape[0] != d2.p:
        raise ValueError(f"beta_hat has length {beta_hat.shape[0]}, dataset has p={d2.p}")
    if not 0 <= tested_index < d2.p:
        raise IndexError(f"tested_index {tested_index} out of range for p={d2.p}")
    u_hat = d2.x @ beta_hat
    if not np.all(np.isfinite(u_hat)):
        raise FloatingPointError("non-finite linear predictor; the pilot fit diverged")
    fd = dsigmoid(u_hat)
    y_new = d2.y - sigmoid(u_hat) + fd * u_hat
    x_new = fd[:, None] * d2.x
    z = x_new[:, tested_index].copy()
    w = np.delete(x_new, tested_index, axis=1)
    return LinearizedData(y_new - z * beta0, z, w, float(beta0), y_new, tested_index)


def rebuild_v(ld: LinearizedData, beta0_new: float) -> LinearizedData:
    """Same reconstruction with a different hypothesized value."""
    if beta0_new == ld.beta0:
        return ld
    return replace(ld, v=ld.y_new - ld.z * beta0_new, beta0=float(beta0_new))
