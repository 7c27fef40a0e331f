import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdslogit.linearize import LinearizedData
from mdslogit.mds import (MdsConfig, MdsStatus, constraint_violation, default_eta, fit_pi,
                          fit_theta, solve_mds)

from lp_oracle import enumerate_vertices


def mds_brute_force(r, d, cfg):
    """min ||theta||_1 over the raw MDS constraints, one sign orthant at a time.

    Variables are (theta, rho); inside an orthant the objective is linear and
    the region is a pointed polyhedron, so the optimum sits at a vertex.
    """
    n, q = d.shape
    nr = np.linalg.norm(r)
    c0 = cfg.eta * math.sqrt(n) * nr
    gram, g = d.T @ d, d.T @ r
    rows = [np.hstack([-gram, -c0 * np.ones((q, 1))]),      # D'r - G th <= c0 rho
            np.hstack([gram, -c0 * np.ones((q, 1))]),       # G th - D'r <= c0 rho
            np.concatenate([g, [cfg.rho0 * nr ** 2 / 2]])[None, :],
            np.concatenate([np.zeros(q), [-1.0]])[None, :],
            np.concatenate([np.zeros(q), [1.0]])[None, :]]
    rhs = [-g, g, [nr ** 2], [-cfg.rho0], [1.0]]
    base_g, base_h = np.vstack(rows), np.concatenate(rhs)
    # put rows on a common scale for the enumeration tolerance
    scale = np.maximum(np.abs(base_g).max(axis=1), 1.0)
    base_g, base_h = base_g / scale[:, None], base_h / scale
    best = None
    for signs in itertools.product((-1.0, 1.0), repeat=q):
        s = np.array(signs)
        orth = np.hstack([-np.diag(s), np.zeros((q, 1))])
        gmat = np.vstack([base_g, orth])
        h = np.concatenate([base_h, np.zeros(q)])
        for v in enumerate_vertices(gmat, h, tol=1e-10):
            val = float(np.abs(v[:q]).sum())
            if best is None or val < best[0]:
                best = (val, v)
    return best


def random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    q = int(rng.integers(1, 4))
    d = rng.normal(size=(n, q))
    r = d @ (rng.normal(size=q) * rng.integers(0, 2, size=q)) + 0.5 * rng.normal(size=n)
    cfg = MdsConfig(eta=float(rng.uniform(0.02, 0.4)), rho0=float(rng.uniform(0.01, 0.5)))
    return r, d, cfg


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_matches_vertex_enumeration(seed):
    r, d, cfg = random_instance(seed)
    fit = solve_mds(r, d, cfg)
    ref = mds_brute_force(r, d, cfg)
    if ref is None:
        assert fit.status is MdsStatus.INFEASIBLE
        return
    assert fit.status is MdsStatus.OPTIMAL
    assert abs(fit.l1_norm - ref[0]) <= 1e-8
    assert constraint_violation(r, d, fit.coef, fit.rho, cfg) <= 1e-8
    assert cfg.rho0 <= fit.rho <= 1
    assert fit.l1_norm == pytest.approx(np.abs(fit.coef).sum(), abs=0)
    np.testing.assert_allclose(fit.residual, r - d @ fit.coef)
    assert fit.sigma_hat == pytest.approx(np.linalg.norm(fit.residual) / math.sqrt(len(r)))


def test_zero_response_rejected():
    with pytest.raises(ValueError):
        solve_mds(np.zeros(5), np.ones((5, 2)), MdsConfig(0.1))


def test_orthogonal_design_gives_zero():
    r = np.array([1.0, -1.0, 1.0, -1.0])
    d = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, -1.0], [1.0, -1.0]])
    assert np.allclose(d.T @ r, 0)
    for eta in (1e-4, 0.1, 2.0):
        fit = solve_mds(r, d, MdsConfig(eta))
        assert fit.status is MdsStatus.OPTIMAL
        assert np.all(fit.coef == 0)


def _ld(v, z, w):
    return LinearizedData(np.asarray(v, float), np.asarray(z, float), np.asarray(w, float), 0.0,
                          np.asarray(v, float))


def test_fit_theta_zero_design():
    v = np.array([0.3, -1.2, 0.8, 0.1, 0.5])
    fit = fit_theta(_ld(v, np.ones(5), np.zeros((5, 3))), MdsConfig(0.2))
    assert fit.status is MdsStatus.OPTIMAL
    assert np.all(fit.coef == 0)
    assert fit.sigma_hat == pytest.approx(np.linalg.norm(v) / math.sqrt(5))


def test_doubling_response_doubles_objective():
    rng = np.random.default_rng(5)
    w = rng.normal(size=(20, 6))
    v = w[:, 0] * 2 - w[:, 3] + 0.3 * rng.normal(size=20)
    cfg = MdsConfig(0.05)
    a = fit_theta(_ld(v, np.ones(20), w), cfg)
    b = fit_theta(_ld(2 * v, np.ones(20), w), cfg)
    assert a.l1_norm > 0
    assert abs(b.l1_norm - 2 * a.l1_norm) <= 1e-8
    assert b.sigma_hat == pytest.approx(2 * a.sigma_hat, rel=1e-8)


def test_exact_fit_is_infeasible_for_small_eta():
    # with Z = W pi0, Z'(Z - W pi) <= ||pi0||_1 * eta * rho * sqrt(n) ||Z||, so the
    # energy row cannot hold once eta < rho0 ||Z|| / (2 sqrt(n) ||pi0||_1)
    rng = np.random.default_rng(11)
    n = 8
    w = rng.normal(size=(n, 3))
    pi0 = np.array([1.5, 0.0, -0.5])
    z = w @ pi0
    rho0 = 0.5
    bound = rho0 * np.linalg.norm(z) / (2 * math.sqrt(n) * np.abs(pi0).sum())
    cfg = MdsConfig(eta=0.5 * bound, rho0=rho0)
    assert fit_pi(_ld(np.ones(n), z, w), cfg).status is MdsStatus.INFEASIBLE
    assert mds_brute_force(z, w, cfg) is None
    # the same geometry for the nuisance fit
    assert fit_theta(_ld(z, np.ones(n), w), cfg).status is MdsStatus.INFEASIBLE


def test_fit_pi_orthogonal():
    w = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, -1.0], [1.0, -1.0]])
    z = np.array([1.0, -1.0, 1.0, -1.0])
    fit = fit_pi(_ld(np.ones(4), z, w), MdsConfig(0.1))
    assert np.all(fit.coef == 0)
    np.testing.assert_array_equal(fit.residual, z)


def test_q_hat_with_zero_design():
    z = np.array([0.5, -0.2, 0.9, 0.3])
    fit = fit_pi(_ld(np.ones(4), z, np.zeros((4, 2))), MdsConfig(0.1))
    assert fit.residual @ fit.residual / 4 == pytest.approx(z @ z / 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_monotone_in_eta(seed):
    rng = np.random.default_rng(seed)
    n, q = 15, 8
    d = rng.normal(size=(n, q))
    r = d[:, :3] @ rng.normal(size=3) + 0.2 * rng.normal(size=n)
    prev = None
    for eta in (0.02, 0.05, 0.1, 0.3):
        fit = solve_mds(r, d, MdsConfig(eta, rho0=0.1))
        if fit.status is not MdsStatus.OPTIMAL:
            continue
        if prev is not None:
            assert fit.l1_norm <= prev + 1e-8
        prev = fit.l1_norm


def test_config_and_default_eta():
    assert default_eta(200, 500) == pytest.approx(0.5 * math.sqrt(math.log(500) / 200))
    with pytest.raises(ValueError):
        MdsConfig(0.1, rho0=1.0)
    with pytest.raises(ValueError):
        MdsConfig(0.0)
