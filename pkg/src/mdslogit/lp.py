"""Dense two-phase primal simplex for  min c'x  s.t.  A x <= b,  x >= 0.

Pricing is Dantzig's largest-coefficient rule; after a run of degenerate
pivots the solver switches to Bland's smallest-index rule until the objective
moves again, which rules out cycling. ``rule="bland"`` uses Bland throughout.
Ties in the ratio test always go to the smallest basic index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-11


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class LpProblem:
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        b = np.asarray(self.b, dtype=float).ravel()
        a = np.asarray(self.a, dtype=float).reshape(b.shape[0], c.shape[0])
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def shape(self):
        return self.a.shape


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float
    status: LpStatus
    max_violation: float
    basis: tuple = ()
    iterations: int = 0
    ray: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class LpDiagnostics:
    max_violation: float
    objective: float
    objective_error: float
    min_reduced_cost: float
    dual_bound: float
    feasible: bool
    optimal_certified: bool


def _violation(p: LpProblem, x: np.ndarray) -> float:
    v = 0.0
    if p.a.shape[0]:
        v = float(np.max(p.a @ x - p.b, initial=0.0))
    return max(v, float(np.max(-x, initial=0.0)))


class _Tableau:
    """Rows 0..k-1 hold B^-1 [A S | rhs]; the last row holds reduced costs."""

    def __init__(self, t: np.ndarray, basis: np.ndarray, pivot_tol: float):
        self.t = t
        self.basis = basis
        self.pivot_tol = pivot_tol
        self.iterations = 0

    def pivot(self, r: int, j: int):
        t = self.t
        t[r] /= t[r, j]
        col = t[:, j].copy()
        col[r] = 0.0
        t -= np.outer(col, t[r])
        self.basis[r] = j

    def run(self, ncols: int, tol: float, rule: str, max_iter: int):
        """Iterate to optimality. Returns ("optimal"|"unbounded"|"stalled", entering col)."""
        t, k = self.t, self.t.shape[0] - 1
        bland = rule == "bland"
        degenerate_run = 0
        for _ in range(max_iter):
            d = t[k, :ncols]
            if bland:
                cand = np.flatnonzero(d < -tol)
                if cand.size == 0:
                    return "optimal", -1
                j = int(cand[0])
            else:
                j = int(np.argmin(d))
                if d[j] >= -tol:
                    return "optimal", -1
            col = t[:k, j]
            pos = np.flatnonzero(col > self.pivot_tol)
            if pos.size == 0:
                return "unbounded", j
            ratios = t[pos, -1] / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(ties[np.argmin(self.basis[ties])])
            self.pivot(r, j)
            self.iterations += 1
            if best <= 1e-12:
                degenerate_run += 1
                if degenerate_run >= 10:
                    bland = True
            else:
                degenerate_run = 0
                bland = rule == "bland"
        return "stalled", -1


def solve_lp(
    problem: LpProblem,
    feas_tol: float = FEAS_TOL,
    pivot_tol: float = PIVOT_TOL,
    rule: str = "auto",
    max_iter: int | None = None,
) -> LpSolution:
    """Solve ``min c'x, A x <= b, x >= 0``.

    ``rule`` is ``"auto"`` (Dantzig pricing with a Bland fallback on degenerate
    stalls) or ``"bland"``.
    """
    if feas_tol <= 0:
        raise ValueError("feas_tol must be positive")
    if rule not in ("auto", "bland"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    a, b, c = problem.a, problem.b, problem.c
    k, m = a.shape
    if max_iter is None:
        max_iter = 50 * (k + m) + 1000
    neg = b < 0
    art_rows = np.flatnonzero(neg)
    na = art_rows.size
    ncols = m + k + na
    t = np.zeros((k + 1, ncols + 1))
    sign = np.where(neg, -1.0, 1.0)
    t[:k, :m] = sign[:, None] * a
    t[np.arange(k), m + np.arange(k)] = sign
    t[art_rows, m + k + np.arange(na)] = 1.0
    t[:k, -1] = np.abs(b)
    basis = m + np.arange(k)
    basis[art_rows] = m + k + np.arange(na)
    tab = _Tableau(t, basis, pivot_tol)

    if na:
        # phase 1: minimize the sum of artificials
        t[k, :] = 0.0
        t[k, m + k:ncols] = 1.0
        t[k] -= t[art_rows].sum(axis=0)
        status, _ = tab.run(ncols, feas_tol, rule, max_iter)
        if status == "stalled":
            return _failure(m, tab.iterations)
        if -t[k, -1] > feas_tol:
            return LpSolution(np.zeros(m), float("nan"), LpStatus.INFEASIBLE, float("inf"),
                              iterations=tab.iterations)
        for r in np.flatnonzero(tab.basis >= m + k):
            row = np.abs(t[r, :m + k])
            j = int(np.argmax(row))
            if row[j] <= pivot_tol:
                return _failure(m, tab.iterations)
            tab.pivot(r, j)
        t = np.delete(t, np.s_[m + k:ncols], axis=1)
        tab.t = t
        ncols = m + k

    cfull = np.concatenate([c, np.zeros(k)])
    t[k, :ncols] = cfull
    t[k, -1] = 0.0
    t[k] -= cfull[tab.basis] @ t[:k]
    status, j = tab.run(ncols, feas_tol, rule, max_iter)
    if status == "stalled":
        return _failure(m, tab.iterations)
    basis = tab.basis.copy()
    if status == "unbounded":
        ray = np.zeros(m + k)
        ray[j] = 1.0
        ray[basis] = -t[:k, j]
        dx = ray[:m]
        ok = float(c @ dx) < 0 and np.all(a @ dx <= 1e-9 * max(1.0, np.abs(dx).max())) and np.all(dx >= -1e-12)
        if not ok:
            return _failure(m, tab.iterations)
        return LpSolution(np.zeros(m), float("-inf"), LpStatus.UNBOUNDED, float("nan"),
                          tuple(int(i) for i in basis), tab.iterations, dx)

    x = _basic_solution(a, b, basis)
    if x is None:
        return _failure(m, tab.iterations)
    viol = _violation(problem, x)
    status = LpStatus.OPTIMAL if viol <= feas_tol else LpStatus.NUMERICAL_FAILURE
    return LpSolution(x, float(c @ x), status, viol, tuple(int(i) for i in basis), tab.iterations)


def _failure(m: int, iters: int) -> LpSolution:
    return LpSolution(np.zeros(m), float("nan"), LpStatus.NUMERICAL_FAILURE, float("inf"),
                      iterations=iters)


def _basis_matrix(a: np.ndarray, basis) -> np.ndarray:
    k, m = a.shape
    full = np.hstack([a, np.eye(k)])
    return full[:, list(basis)]


def _basic_solution(a, b, basis):
    """Recompute the vertex from the final basis; cleaner than the tableau rhs."""
    k, m = a.shape
    bm = _basis_matrix(a, basis)
    try:
        xb = np.linalg.solve(bm, b)
    except np.linalg.LinAlgError:
        return None
    full = np.zeros(m + k)
    full[list(basis)] = xb
    x = full[:m]
    # snap round-off negatives of basic structurals
    x[(x < 0) & (x > -1e-13)] = 0.0
    return x


def check_solution(problem: LpProblem, sol: LpSolution, feas_tol: float = FEAS_TOL) -> LpDiagnostics:
    """Independent recomputation of feasibility, objective and dual certificate."""
    a, b, c = problem.a, problem.b, problem.c
    k, m = a.shape
    x = np.asarray(sol.x, dtype=float)
    viol = _violation(problem, x)
    obj = float(c @ x)
    min_rc, bound, certified = float("nan"), float("nan"), False
    if sol.status == LpStatus.OPTIMAL and len(sol.basis) == k:
        bm = _basis_matrix(a, sol.basis)
        cfull = np.concatenate([c, np.zeros(k)])
        try:
            y = np.linalg.solve(bm.T, cfull[list(sol.basis)])
        except np.linalg.LinAlgError:
            y = None
        if y is not None:
            rc = cfull - np.hstack([a, np.eye(k)]).T @ y
            min_rc = float(rc.min(initial=0.0))
            bound = float(b @ y)
            certified = min_rc >= -feas_tol
    err = abs(obj - sol.objective) if np.isfinite(sol.objective) else float("nan")
    return LpDiagnostics(viol, obj, err, min_rc, bound, viol <= feas_tol, certified)


def solve_general(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, lower=None, upper=None,
                  feas_tol: float = FEAS_TOL, rule: str = "auto"):
    """Bounded/free variables and equality rows reduced to the canonical form.

    ``lower``/``upper`` are per-variable bounds (``-inf``/``inf`` allowed).
    Returns ``(x, solution)`` where ``x`` is in the caller's variables.
    """
    c = np.asarray(c, dtype=float).ravel()
    m = c.shape[0]
    lower = np.zeros(m) if lower is None else np.asarray(lower, dtype=float).ravel()
    upper = np.full(m, np.inf) if upper is None else np.asarray(upper, dtype=float).ravel()
    rows, rhs = [], []
    if a_ub is not None:
        rows.append(np.atleast_2d(np.asarray(a_ub, dtype=float)))
        rhs.append(np.asarray(b_ub, dtype=float).ravel())
    if a_eq is not None:
        ae = np.atleast_2d(np.asarray(a_eq, dtype=float))
        be = np.asarray(b_eq, dtype=float).ravel()
        rows += [ae, -ae]
        rhs += [be, -be]
    a = np.vstack(rows) if rows else np.zeros((0, m))
    b = np.concatenate(rhs) if rhs else np.zeros(0)

    # x = shift + M @ x_std, with free variables split into +/- parts
    free = ~np.isfinite(lower)
    shift = np.where(free, 0.0, lower)
    cols = []
    for j in range(m):
        e = np.zeros(m)
        e[j] = 1.0
        cols.append(e)
        if free[j]:
            cols.append(-e)
    M = np.array(cols).T
    b = b - a @ shift
    a = a @ M
    ub_idx = np.flatnonzero(np.isfinite(upper))
    if ub_idx.size:
        box = np.zeros((ub_idx.size, M.shape[1]))
        for r, j in enumerate(ub_idx):
            box[r] = M[j]
        a = np.vstack([a, box])
        b = np.concatenate([b, upper[ub_idx] - shift[ub_idx]])
    sol = solve_lp(LpProblem(M.T @ c, a, b), feas_tol=feas_tol, rule=rule)
    return shift + M @ sol.x, sol
