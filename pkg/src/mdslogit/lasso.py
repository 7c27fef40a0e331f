"""L1-penalized logistic regression by proximal gradient with backtracking."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import Dataset, neg_log_likelihood, nll_gradient

log = logging.getLogger(__name__)


class LassoError(RuntimeError):
    pass


@dataclass(frozen=True)
class LassoConfig:
    lam: float
    max_iters: int = 10_000
    tol: float = 1e-7
    step_init: float = 1.0
    accelerate: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.tol <= 0 or self.max_iters < 1 or self.step_init <= 0:
            raise ValueError("need tol > 0, max_iters >= 1, step_init > 0")


@dataclass(frozen=True)
class LassoFit:
    beta_hat: np.ndarray
    objective: float
    iters: int
    kkt_residual: float
    converged: bool
    lam: float
    objective_path: tuple = ()


def default_lambda(n: int, p: int, scale: float = 1.0) -> float:
    return scale * math.sqrt(math.log(p) / n)


def soft_threshold(v, t):
    v = np.asarray(v, dtype=float)
    out = np.sign(v) * np.maximum(np.abs(v) - t, 0.0)
    return out if out.ndim else float(out)


def penalized_objective(ds: Dataset, beta, lam: float) -> float:
    return neg_log_likelihood(ds, beta) + lam * float(np.sum(np.abs(beta)))


def kkt_residual(grad: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Largest violation of the lasso subgradient optimality conditions."""
    zero = beta == 0
    r_zero = np.maximum(np.abs(grad[zero]) - lam, 0.0)
    r_act = np.abs(grad[~zero] + lam * np.sign(beta[~zero]))
    return float(max(r_zero.max(initial=0.0), r_act.max(initial=0.0)))


def fit_logistic_lasso(ds: Dataset, cfg: LassoConfig) -> LassoFit:
    """Minimize mean logistic loss + lam * ||beta||_1 starting from zero.

    Every accepted step satisfies the sufficient-decrease condition of the
    quadratic upper model, so the objective is monotone. With
    ``cfg.accelerate`` a FISTA momentum step is tried first and dropped
    whenever it would raise the objective.
    """
    lam = cfg.lam
    beta = np.zeros(ds.p)
    obj = penalized_objective(ds, beta, lam)
    step = cfg.step_init
    grad = nll_gradient(ds, beta)
    kkt = kkt_residual(grad, beta, lam)
    it = 0
    y_pt, t_mom = beta.copy(), 1.0
    path = [obj]
    while kkt > cfg.tol and it < cfg.max_iters:
        it += 1
        base = y_pt if cfg.accelerate else beta
        f_base = neg_log_likelihood(ds, base)
        g_base = nll_gradient(ds, base) if cfg.accelerate else grad
        while True:
            cand = soft_threshold(base - step * g_base, step * lam)
            d = cand - base
            f_cand = neg_log_likelihood(ds, cand)
            if f_cand <= f_base + g_base @ d + (d @ d) / (2 * step) + 1e-15:
                break
            step *= 0.5
            if step < 1e-20:
                raise LassoError("backtracking step collapsed")
        cand_obj = f_cand + lam * float(np.abs(cand).sum())
        if not math.isfinite(cand_obj):
            raise LassoError("non-finite objective; check the data for separation or scaling")
        if cfg.accelerate:
            if cand_obj > obj:
                # restart momentum from the last accepted point
                y_pt, t_mom = beta.copy(), 1.0
                continue
            t_next = 0.5 * (1 + math.sqrt(1 + 4 * t_mom * t_mom))
            y_pt = cand + ((t_mom - 1) / t_next) * (cand - beta)
            t_mom = t_next
        beta, obj = cand, cand_obj
        path.append(obj)
        grad = nll_gradient(ds, beta)
        kkt = kkt_residual(grad, beta, lam)
    converged = kkt <= cfg.tol
    if not converged:
        log.warning("lasso stopped after %d iterations with KKT residual %.3g", it, kkt)
    return LassoFit(beta, obj, it, kkt, converged, lam, tuple(path))
