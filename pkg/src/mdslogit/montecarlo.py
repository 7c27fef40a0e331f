"""Synthetic Gaussian designs and the replication harness for size, power and coverage."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .inference import InferenceConfig, PipelineError, confidence_interval, prepare
from .model import Dataset, sigmoid

log = logging.getLogger(__name__)

DESIGN_KINDS = ("toeplitz", "identity", "equicorrelation")


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    def __init__(self, index: int, pivot: float):
        super().__init__(f"matrix is not positive definite: pivot {index} is {pivot:.3g}")
        self.index = index


def cholesky(sigma) -> np.ndarray:
    """Lower-triangular L with L L' = sigma."""
    s = np.asarray(sigma, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("sigma must be square")
    if np.max(np.abs(s - s.T), initial=0.0) > 1e-12:
        raise ValueError("sigma is not symmetric")
    p = s.shape[0]
    L = np.zeros_like(s)
    for j in range(p):
        row = L[j, :j]
        d = s[j, j] - row @ row
        if not d > 0:
            raise NotPositiveDefiniteError(j, d)
        L[j, j] = math.sqrt(d)
        L[j + 1:, j] = (s[j + 1:, j] - L[j + 1:, :j] @ row) / L[j, j]
    return L


@dataclass(frozen=True)
class DesignSpec:
    kind: str
    n: int
    p: int
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise ValueError(f"unknown design {self.kind!r}; choose from {DESIGN_KINDS}")
        if self.n < 2 or self.p < 2:
            raise ValueError("design needs n >= 2 and p >= 2")
        if self.kind == "toeplitz" and not -1 < self.rho < 1:
            raise ValueError("toeplitz rho must lie in (-1, 1)")
        if self.kind == "equicorrelation" and not 0 <= self.rho < 1:
            raise ValueError("equicorrelation rho must lie in [0, 1)")

    @property
    def label(self) -> str:
        return "identity" if self.kind == "identity" else f"{self.kind}({self.rho:g})"

    def covariance(self) -> np.ndarray:
        idx = np.arange(self.p)
        if self.kind == "toeplitz":
            return self.rho ** np.abs(idx[:, None] - idx[None, :])
        if self.kind == "equicorrelation":
            return np.full((self.p, self.p), self.rho) + (1 - self.rho) * np.eye(self.p)
        return np.eye(self.p)

    @classmethod
    def parse(cls, text: str, n: int, p: int) -> "DesignSpec":
        """``identity``, ``toeplitz`` / ``toeplitz:0.4``, ``equicorrelation:0.01``."""
        kind, _, arg = text.partition(":")
        kind = kind.strip().lower()
        aliases = {"noncorrelation": "identity", "equal": "equicorrelation", "equicorr": "equicorrelation"}
        kind = aliases.get(kind, kind)
        default = {"toeplitz": 0.4, "equicorrelation": 0.01, "identity": 0.0}.get(kind, 0.0)
        return cls(kind, n, p, float(arg) if arg else default)


@dataclass(frozen=True)
class ModelSpec:
    sparsity: int
    signal: float | None = None
    h: float = 0.0
    tested_index: int = 0

    def coefficients(self, p: int) -> np.ndarray:
        if not 1 <= self.sparsity <= p:
            raise ValueError(f"sparsity must lie in [1, {p}]")
        signal = 3 / math.sqrt(p) if self.signal is None else self.signal
        beta = np.zeros(p)
        beta[: self.sparsity] = signal
        beta[self.tested_index] += self.h
        return beta


def _rng(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def sample_design(spec: DesignSpec, seed) -> np.ndarray:
    """n x p matrix with i.i.d. N(0, Sigma) rows (Philox stream, ziggurat normals)."""
    z = _rng(seed).standard_normal((spec.n, spec.p))
    if spec.kind == "identity":
        return z
    return z @ cholesky(spec.covariance()).T


def generate_dataset(design: DesignSpec, model: ModelSpec, seed) -> Dataset:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    x_seed, y_seed = ss.spawn(2)
    x = sample_design(design, x_seed)
    prob = sigmoid(x @ model.coefficients(design.p))
    y = (_rng(y_seed).random(design.n) < prob).astype(float)
    return Dataset(x, y)


def replication_seed(master: int, cell: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(cell, rep))


def binomial_band(reps: int, prob: float, confidence: float = 0.99) -> tuple[float, float]:
    """Equal-tailed exact binomial acceptance band for an empirical rate."""
    tail = (1 - confidence) / 2
    lo = stats.binom.ppf(tail, reps, prob)
    hi = stats.binom.ppf(1 - tail, reps, prob)
    return float(lo) / reps, float(hi) / reps


def ks_critical_value(n: int, level: float = 0.01) -> float:
    return float(stats.kstwo.ppf(1 - level, n))


@dataclass
class CellResult:
    design: str
    s: int
    h: float
    reps: int
    completed: int = 0
    rejections: int = 0
    infeasible: int = 0
    failures: int = 0
    covered: int = 0
    degenerate_ci: int = 0
    ci_length_sum: float = 0.0
    z_scores: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.completed == 0

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.completed if self.completed else float("nan")

    @property
    def se(self) -> float:
        r = self.rejection_rate
        return math.sqrt(r * (1 - r) / self.completed) if self.completed else float("nan")

    @property
    def coverage(self) -> float:
        return self.covered / self.completed if self.completed else float("nan")

    @property
    def mean_ci_length(self) -> float:
        ok = self.completed - self.degenerate_ci
        return self.ci_length_sum / ok if ok > 0 else float("nan")


@dataclass
class ExperimentReport:
    kind: str
    seed: int
    config: dict
    cells: list

    def rows(self) -> list[dict]:
        out = []
        for c in self.cells:
            row = {"design": c.design, "s": c.s, "h": c.h, "reps": c.reps}
            if self.kind == "power":
                row |= {"power": c.rejection_rate, "se": c.se}
            else:
                row |= {"rejection_rate": c.rejection_rate, "se": c.se}
            if self.kind == "coverage":
                row |= {"coverage": c.coverage, "mean_ci_length": c.mean_ci_length,
                        "degenerate_ci": c.degenerate_ci}
            row |= {"completed": c.completed, "infeasible": c.infeasible, "failures": c.failures,
                    "status": "failed" if c.failed else "ok"}
            out.append(row)
        return out


def _one_replication(task):
    """Worker: (kind, design, model, seed, params) -> per-replication record."""
    kind, design, model, ss, params = task
    cfg: InferenceConfig = params["cfg"]
    ds = generate_dataset(design, model, ss)
    split_seed = int(ss.generate_state(1)[0])
    cfg = InferenceConfig(**{**asdict(cfg), "seed": split_seed})
    beta = model.coefficients(design.p)
    ti = model.tested_index
    try:
        prep = prepare(ds, ti, cfg)
        if kind == "coverage":
            ci = confidence_interval(ds, ti, params["level"], params["grid"], cfg, prepared=prep)
            truth = float(beta[ti])
            return {"status": "ok", "reject": None, "z": None, "covered": ci.covers(truth),
                    "degenerate": ci.degenerate, "length": 0.0 if ci.degenerate else ci.length}
        out = prep.at(params["beta0"], params["alpha"])
        return {"status": "ok", "reject": out.reject, "z": out.z_score}
    except PipelineError as exc:
        return {"status": "infeasible" if exc.kind == "infeasible" else "failure", "error": str(exc)}


def _execute(tasks: list, threads: int = 1, order=None) -> list:
    """Run tasks (optionally in a permuted order) and return results in task order."""
    order = list(range(len(tasks))) if order is None else list(order)
    results = [None] * len(tasks)
    if threads <= 1:
        for i in order:
            results[i] = _one_replication(tasks[i])
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for i, res in zip(order, pool.map(_one_replication, [tasks[i] for i in order], chunksize=4)):
                results[i] = res
    return results


def _aggregate(cell: CellResult, results: list) -> CellResult:
    for r in results:
        if r["status"] == "infeasible":
            cell.infeasible += 1
            continue
        if r["status"] != "ok":
            cell.failures += 1
            continue
        cell.completed += 1
        if r.get("reject") is not None:
            cell.rejections += int(r["reject"])
            cell.z_scores.append(r["z"])
        if "covered" in r:
            cell.covered += int(r["covered"])
            cell.degenerate_ci += int(r["degenerate"])
            cell.ci_length_sum += r["length"]
    return cell


def _run_cells(kind, cells, reps, cfg, seed, threads, order, config, alpha=0.05, level=None, grid=None):
    """Build one task per (cell, replication), run them, aggregate per cell.

    Under the null (h = 0) the hypothesized value is the true tested
    coefficient; under an alternative it is the true value minus ``h``.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    tasks, index = [], []
    for ci, (design, model) in enumerate(cells):
        beta = model.coefficients(design.p)
        b0 = float(beta[model.tested_index] - model.h)
        params = {"cfg": cfg, "alpha": alpha, "beta0": b0, "level": level, "grid": grid}
        for r in range(reps):
            tasks.append((kind, design, model, replication_seed(seed, ci, r), params))
            index.append(ci)
    results = _execute(tasks, _threads(threads), order)
    out = []
    for ci, (design, model) in enumerate(cells):
        cell = CellResult(design.label, model.sparsity, model.h, reps)
        out.append(_aggregate(cell, [res for res, k in zip(results, index) if k == ci]))
    return ExperimentReport(kind, seed, config, out)


def _threads(threads: int) -> int:
    return (os.cpu_count() or 1) if threads == 0 else max(1, threads)


def _echo(cfg: InferenceConfig, designs, **extra) -> dict:
    return {**extra, "designs": [d.label for d in designs], "n": designs[0].n, "p": designs[0].p,
            **asdict(cfg)}


def run_size_experiment(designs, sparsities, reps: int, alpha: float = 0.05,
                        cfg: InferenceConfig = InferenceConfig(), seed: int = 0,
                        threads: int = 1, order=None) -> ExperimentReport:
    """Null rejection rate per (design, sparsity) cell."""
    cells = [(d, ModelSpec(s)) for d in designs for s in sparsities]
    config = _echo(cfg, designs, experiment="size", sparsities=list(sparsities), reps=reps, alpha=alpha)
    return _run_cells("size", cells, reps, cfg, seed, threads, order, config, alpha=alpha)


def run_power_experiment(design: DesignSpec, s: int, h_grid, reps: int, alpha: float = 0.05,
                         cfg: InferenceConfig = InferenceConfig(), seed: int = 0,
                         threads: int = 1, order=None) -> ExperimentReport:
    """Rejection rate of the null beta_tested = signal when the truth is signal + h."""
    cells = [(design, ModelSpec(s, h=float(h))) for h in h_grid]
    config = _echo(cfg, [design], experiment="power", sparsity=s, h_grid=[float(h) for h in h_grid],
                   reps=reps, alpha=alpha)
    return _run_cells("power", cells, reps, cfg, seed, threads, order, config, alpha=alpha)


def run_coverage_experiment(designs, sparsities, reps: int, level: float = 0.95, grid=None,
                            cfg: InferenceConfig = InferenceConfig(), seed: int = 0,
                            threads: int = 1, order=None) -> ExperimentReport:
    """Fraction of inverted intervals covering the true tested coefficient.

    ``grid`` of ``None`` centres the default grid on each replication's pilot
    estimate; a ``(lo, hi, steps)`` tuple is used verbatim.
    """
    cells = [(d, ModelSpec(s)) for d in designs for s in sparsities]
    config = _echo(cfg, designs, experiment="coverage", sparsities=list(sparsities), reps=reps,
                   level=level, grid=None if grid is None else list(grid))
    return _run_cells("coverage", cells, reps, cfg, seed, threads, order, config, level=level, grid=grid)
