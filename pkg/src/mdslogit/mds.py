"""Modified Dantzig selector: L1-minimal coefficients with a joint noise ratio.

For a response ``r`` and design ``D`` (n x q) the program is

    min ||theta||_1  over (theta, rho)
    s.t. ||D'(r - D theta)||_inf <= eta * rho * sqrt(n) * ||r||_2
         r'(r - D theta)          >= rho0 * rho * ||r||_2^2 / 2
         rho0 <= rho <= 1

It is posed as an LP in (theta+, theta-, 1 - rho). Rows are rescaled (by 1/n and
1/||r||^2) so every constraint is O(1); feasibility tolerances and
``constraint_violation`` are reported in those units.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linearize import LinearizedData
from .lp import FEAS_TOL, LpProblem, LpStatus, solve_lp

log = logging.getLogger(__name__)


class MdsStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    SOLVER_FAILURE = "solver_failure"


@dataclass(frozen=True)
class MdsConfig:
    eta: float
    rho0: float = 0.01
    feas_tol: float = FEAS_TOL

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not 0 < self.rho0 < 1:
            raise ValueError("rho0 must lie in (0, 1)")
        if not self.feas_tol > 0:
            raise ValueError("feas_tol must be positive")


def default_eta(n: int, p: int, scale: float = 0.5) -> float:
    return scale * math.sqrt(math.log(p) / n)


@dataclass(frozen=True)
class MdsFit:
    coef: np.ndarray
    rho: float
    residual: np.ndarray
    sigma_hat: float
    l1_norm: float
    status: MdsStatus
    lp_iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status is MdsStatus.OPTIMAL


def constraint_violation(response, design, coef, rho, cfg: MdsConfig) -> float:
    """Largest violation of the (rescaled) MDS constraints at ``(coef, rho)``.

    Computed from the raw definitions, not from the LP rows.
    """
    r = np.asarray(response, dtype=float)
    d = np.asarray(design, dtype=float)
    n = r.shape[0]
    rr = float(r @ r)
    resid = r - d @ coef
    corr = np.max(np.abs(d.T @ resid), initial=0.0) / n
    bound = cfg.eta * rho * math.sqrt(rr) / math.sqrt(n)
    energy = float(r @ resid) / rr
    return max(
        corr - bound,
        cfg.rho0 * rho / 2 - energy,
        cfg.rho0 - rho,
        rho - 1.0,
        0.0,
    )


def solve_mds(response, design, cfg: MdsConfig) -> MdsFit:
    r = np.asarray(response, dtype=float).ravel()
    d = np.asarray(design, dtype=float)
    n, q = d.shape
    if r.shape[0] != n or n < 2:
        raise ValueError(f"response length {r.shape[0]} does not match design rows {n}")
    rr = float(r @ r)
    if not rr > 0:
        raise ValueError("response must have positive norm")
    gram = d.T @ d / n
    g = d.T @ r / n
    c0 = cfg.eta * math.sqrt(rr) / math.sqrt(n)
    # variables (theta+, theta-, tau) with rho = 1 - tau, so that theta = 0,
    # rho = 1 is the slack basis whenever ||D'r||_inf / n <= c0
    ones = np.ones((q, 1))
    a = np.vstack([
        np.hstack([-gram, gram, c0 * ones]),
        np.hstack([gram, -gram, c0 * ones]),
        np.concatenate([g * n / rr, -g * n / rr, [-cfg.rho0 / 2]])[None, :],
        np.concatenate([np.zeros(2 * q), [1.0]])[None, :],
    ])
    b = np.concatenate([c0 - g, c0 + g, [1 - cfg.rho0 / 2], [1 - cfg.rho0]])
    cost = np.concatenate([np.ones(2 * q), [0.0]])
    sol = solve_lp(LpProblem(cost, a, b), feas_tol=cfg.feas_tol)
    x = sol.x

    if sol.status is LpStatus.INFEASIBLE:
        return _empty(r, q, MdsStatus.INFEASIBLE, sol.iterations)
    if sol.status is not LpStatus.OPTIMAL:
        log.warning("MDS linear program failed with status %s", sol.status.value)
        return _empty(r, q, MdsStatus.SOLVER_FAILURE, sol.iterations)
    coef = x[:q] - x[q:2 * q]
    rho = float(min(max(1.0 - x[-1], cfg.rho0), 1.0))
    resid = r - d @ coef
    sigma_hat = float(np.linalg.norm(resid) / math.sqrt(n))
    # plug-in version of the equivalent residual-energy form; informational only
    sigma_tilde = rho * math.sqrt(rr / n)
    if resid @ resid < (cfg.rho0 ** 2 / 2) * n * sigma_tilde ** 2 / 2:
        log.debug("residual-energy diagnostic not met: %.3g", resid @ resid)
    return MdsFit(coef, rho, resid, sigma_hat, float(np.abs(coef).sum()), MdsStatus.OPTIMAL,
                  sol.iterations)


def _empty(r, q, status, iters) -> MdsFit:
    return MdsFit(np.full(q, np.nan), float("nan"), np.full(r.shape[0], np.nan), float("nan"),
                  float("nan"), status, iters)


def fit_theta(ld: LinearizedData, cfg: MdsConfig) -> MdsFit:
    """Nuisance fit of the pseudo-response on the nuisance design."""
    fit = solve_mds(ld.v, ld.w, cfg)
    if fit.ok and fit.sigma_hat == 0:
        log.warning("zero residual scale in the nuisance fit")
    return fit


def fit_pi(ld: LinearizedData, cfg: MdsConfig) -> MdsFit:
    """Decoupling fit of the tested column on the nuisance design."""
    return solve_mds(ld.z, ld.w, cfg)
