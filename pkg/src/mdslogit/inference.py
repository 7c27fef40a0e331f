"""Moment-based test of a single logistic coefficient and its inverted CI."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lasso import LassoConfig, LassoError, default_lambda, fit_logistic_lasso
from .linearize import LinearizedData, linearize, rebuild_v
from .mds import MdsConfig, MdsFit, MdsStatus, default_eta, fit_pi, fit_theta
from .model import DataError, Dataset, split_samples


class PipelineError(RuntimeError):
    """A stage of the testing pipeline could not complete.

    ``kind`` is one of ``"data"``, ``"infeasible"`` or ``"numerical"``.
    """

    def __init__(self, stage: str, message: str, kind: str = "numerical"):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.kind = kind


# Acklam's rational approximation to the normal quantile
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_sf(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def normal_quantile(q: float) -> float:
    """Inverse standard normal CDF (rational start plus one Halley correction)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    if q < _P_LOW:
        s = math.sqrt(-2 * math.log(q))
        x = (((((_C[0] * s + _C[1]) * s + _C[2]) * s + _C[3]) * s + _C[4]) * s + _C[5]) / \
            ((((_D[0] * s + _D[1]) * s + _D[2]) * s + _D[3]) * s + 1)
    elif q <= 1 - _P_LOW:
        s = q - 0.5
        r = s * s
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * s / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1)
    else:
        s = math.sqrt(-2 * math.log1p(-q))
        x = -(((((_C[0] * s + _C[1]) * s + _C[2]) * s + _C[3]) * s + _C[4]) * s + _C[5]) / \
            ((((_D[0] * s + _D[1]) * s + _D[2]) * s + _D[3]) * s + 1)
    # Halley step; work in the tail that keeps erfc accurate
    e = normal_cdf(x) - q if q <= 0.5 else (1 - q) - normal_sf(x)
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


@dataclass(frozen=True)
class InferenceConfig:
    """Tuning for the whole pipeline. ``None`` rates use the default formulas."""

    split_fraction: float = 0.5
    seed: int = 0
    lambda_scale: float = 1.0
    eta_scale: float = 0.5
    rho0: float = 0.01
    feas_tol: float = 1e-8
    lasso_tol: float = 1e-7
    lasso_max_iters: int = 10_000
    accelerate: bool = False

    def lasso_config(self, n: int, p: int) -> LassoConfig:
        return LassoConfig(default_lambda(n, p, self.lambda_scale), self.lasso_max_iters,
                           self.lasso_tol, accelerate=self.accelerate)

    def mds_config(self, n: int, p: int) -> MdsConfig:
        return MdsConfig(default_eta(n, p, self.eta_scale), self.rho0, self.feas_tol)


@dataclass(frozen=True)
class TestOutcome:
    t_n: float
    q_hat: float
    z_score: float
    p_value: float
    reject: bool
    alpha: float
    beta0: float
    theta_status: str
    pi_status: str
    sigma_e: float
    n: int = 0
    p: int = 0
    tested_index: int = 0

    __test__ = False  # not a pytest class

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def test_statistic(ld: LinearizedData, theta_fit: MdsFit, pi_fit: MdsFit, alpha: float = 0.05) -> TestOutcome:
    """T_n = n^-1/2 sigma_e^-1 U_hat' e_hat with variance estimate Q = ||U_hat||^2 / n."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    for name, fit in (("theta-fit", theta_fit), ("pi-fit", pi_fit)):
        if fit.status is not MdsStatus.OPTIMAL:
            kind = "infeasible" if fit.status is MdsStatus.INFEASIBLE else "numerical"
            raise PipelineError(name, f"untestable: fit status {fit.status.value}", kind)
    n = ld.n
    sigma_e = theta_fit.sigma_hat
    q_hat = float(pi_fit.residual @ pi_fit.residual) / n
    if not (sigma_e > 0 and q_hat > 0):
        raise PipelineError("statistic", f"degenerate normalization (sigma_e={sigma_e}, Q={q_hat})")
    t_n = float(pi_fit.residual @ theta_fit.residual) / (math.sqrt(n) * sigma_e)
    z = t_n / math.sqrt(q_hat)
    crit = normal_quantile(1 - alpha / 2)
    return TestOutcome(
        t_n=t_n, q_hat=q_hat, z_score=z, p_value=min(1.0, 2 * normal_sf(abs(z))),
        reject=abs(t_n) > math.sqrt(q_hat) * crit, alpha=alpha, beta0=ld.beta0,
        theta_status=theta_fit.status.value, pi_status=pi_fit.status.value, sigma_e=sigma_e,
        n=n, p=ld.w.shape[1] + 1, tested_index=ld.tested_index,
    )


@dataclass(frozen=True)
class PreparedTest:
    """Everything that does not depend on the hypothesized value."""

    ld: LinearizedData
    pi_fit: MdsFit
    mds_cfg: MdsConfig
    beta_hat: np.ndarray
    lasso_converged: bool

    def at(self, beta0: float, alpha: float = 0.05) -> TestOutcome:
        ld = rebuild_v(self.ld, beta0)
        if not np.linalg.norm(ld.v) > 0:
            raise PipelineError("theta-fit", "pseudo-response is identically zero", "data")
        return test_statistic(ld, fit_theta(ld, self.mds_cfg), self.pi_fit, alpha)


def prepare(ds: Dataset, tested_index: int = 0, cfg: InferenceConfig = InferenceConfig()) -> PreparedTest:
    """Split, pilot lasso on the first half, linearize and decouple on the second."""
    if not 0 <= tested_index < ds.p:
        raise PipelineError("config", f"tested_index {tested_index} out of range for p={ds.p}", "data")
    try:
        sp = split_samples(ds, cfg.split_fraction, cfg.seed)
    except DataError as exc:
        raise PipelineError("split", str(exc), "data") from exc
    try:
        lfit = fit_logistic_lasso(sp.d1, cfg.lasso_config(sp.d1.n, ds.p))
    except LassoError as exc:
        raise PipelineError("lasso", str(exc)) from exc
    try:
        ld = linearize(sp.d2, lfit.beta_hat, tested_index, 0.0)
    except FloatingPointError as exc:
        raise PipelineError("linearize", str(exc)) from exc
    if not np.linalg.norm(ld.z) > 0:
        raise PipelineError("pi-fit", "tested column is identically zero", "data")
    mcfg = cfg.mds_config(sp.d2.n, ds.p)
    return PreparedTest(ld, fit_pi(ld, mcfg), mcfg, lfit.beta_hat, lfit.converged)


def run_test(ds: Dataset, tested_index: int = 0, beta0: float = 0.0, alpha: float = 0.05,
             cfg: InferenceConfig = InferenceConfig()) -> TestOutcome:
    return prepare(ds, tested_index, cfg).at(beta0, alpha)


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    grid: tuple
    contains_point_estimate: bool
    point_estimate: float = float("nan")
    degenerate: bool = False
    contiguous: bool = True
    grid_points: np.ndarray = field(default=None, repr=False)
    accepted: np.ndarray = field(default=None, repr=False)

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def covers(self, value: float) -> bool:
        return not self.degenerate and self.lower <= value <= self.upper


def default_grid(center: float, n: int, p: int, steps: int = 81) -> tuple:
    half = 10 * math.sqrt(math.log(p) / n)
    return (center - half, center + half, steps)


def confidence_interval(ds: Dataset, tested_index: int = 0, level: float = 0.95, grid: tuple | None = None,
                        cfg: InferenceConfig = InferenceConfig(), prepared: PreparedTest | None = None
                        ) -> ConfidenceInterval:
    """Invert the test over an evenly spaced grid of hypothesized values.

    The interval runs from the smallest to the largest accepted grid value.
    When nothing is accepted the result is flagged ``degenerate`` with NaN ends.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    prep = prepared if prepared is not None else prepare(ds, tested_index, cfg)
    est = float(prep.beta_hat[tested_index])
    if grid is None:
        grid = default_grid(est, prep.ld.n, ds.p)
    lo, hi, steps = grid
    steps = int(steps)
    if steps < 3 or not lo < hi:
        raise ValueError("grid needs lo < hi and at least 3 steps")
    points = np.linspace(lo, hi, steps)
    alpha = 1 - level
    accepted = np.zeros(steps, dtype=bool)
    for i, b0 in enumerate(points):
        accepted[i] = not prep.at(float(b0), alpha).reject
    idx = np.flatnonzero(accepted)
    if idx.size == 0:
        return ConfidenceInterval(float("nan"), float("nan"), level, (lo, hi, steps), False, est,
                                  degenerate=True, contiguous=False, grid_points=points, accepted=accepted)
    lower, upper = float(points[idx[0]]), float(points[idx[-1]])
    return ConfidenceInterval(lower, upper, level, (lo, hi, steps), lower <= est <= upper, est,
                              contiguous=bool(idx[-1] - idx[0] + 1 == idx.size),
                              grid_points=points, accepted=accepted)
