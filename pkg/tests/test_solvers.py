import numpy as np
import pytest

from conftest import general_dataset, orthonormal_dataset
from lassodf.model import (AdaptiveLasso, Dataset, ExponentialDecay, Fixed,
                           GroupInverseNorm, GroupLasso, GroupStructure,
                           InversePower, Lasso)
from lassodf.solvers import (SolverConfig, compute_path, detect_transitions,
                             fit_adaptive_group_lasso, fit_adaptive_lasso,
                             fit_group_lasso, fit_ols, fit_weighted_lasso,
                             group_kkt, lasso_kkt, null_gamma_group,
                             null_gamma_lasso, record_fits, soft_threshold)


def lasso_objective(data, beta, w, gamma):
    r = data.y - data.X @ beta
    return 0.5 * r @ r + gamma * np.sum(w * np.abs(beta))


def ista(data, w, gamma, iters=20000):
    L = np.linalg.eigvalsh(data.gram).max()
    b = np.zeros(data.p)
    for _ in range(iters):
        b = soft_threshold(b + (data.xty - data.gram @ b) / L, gamma * w / L)
    return b


def test_soft_threshold():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(-0.5, 1.0) == 0.0
    assert soft_threshold(-3.0, 1.0) == -2.0


def test_ols(rng):
    data = orthonormal_dataset(rng, 20, 5)
    np.testing.assert_allclose(fit_ols(data), data.X.T @ data.y, atol=1e-12)
    X = rng.standard_normal((30, 6))
    beta = rng.standard_normal(6)
    np.testing.assert_allclose(fit_ols(Dataset(X, X @ beta)), beta, atol=1e-9)
    np.testing.assert_allclose(fit_ols(Dataset([[2.0]], [6.0])), [3.0])


def test_lasso_orthonormal_soft_threshold(rng):
    data = orthonormal_dataset(rng, 30, 8)
    w = rng.uniform(0.5, 2.0, 8)
    fit = fit_weighted_lasso(data, w, 0.7)
    np.testing.assert_allclose(fit.beta, soft_threshold(fit_ols(data), 0.7 * w), atol=1e-12)
    assert fit.converged and fit.kkt_residual <= 1e-8


def test_lasso_null_threshold(rng):
    data = general_dataset(rng, 40, 6)
    w = np.ones(6)
    g0 = null_gamma_lasso(data, w)
    assert np.all(fit_weighted_lasso(data, w, g0).beta == 0)
    assert np.any(fit_weighted_lasso(data, w, 0.99 * g0).beta != 0)


def test_lasso_matches_slow_oracle(rng):
    data = general_dataset(rng, 50, 8)
    w = np.ones(8)
    gamma = 0.3 * null_gamma_lasso(data, w)
    fit = fit_weighted_lasso(data, w, gamma)
    ref = ista(data, w, gamma)
    assert abs(lasso_objective(data, fit.beta, w, gamma)
               - lasso_objective(data, ref, w, gamma)) <= 1e-6
    assert lasso_kkt(data, fit.beta, w, gamma) <= 1e-8


def test_adaptive_lasso_scalar_case():
    data = Dataset([[1.0]], [2.0])
    fit = fit_adaptive_lasso(data, InversePower(1.0), 1.0)
    assert fit.beta[0] == pytest.approx(1.5, abs=1e-12)


def test_adaptive_lasso_weights_and_reduction(rng):
    data = orthonormal_dataset(rng, 30, 6)
    ls = fit_ols(data)
    fit = fit_adaptive_lasso(data, ExponentialDecay(0.5), 0.4)
    np.testing.assert_allclose(fit.weights, np.exp(-0.5 * np.abs(ls)))
    plain = fit_weighted_lasso(data, np.ones(6), 0.4)
    fixed = fit_adaptive_lasso(data, Fixed(np.ones(6)), 0.4)
    np.testing.assert_array_equal(plain.beta, fixed.beta)


def test_group_lasso_block_shrinkage():
    data = Dataset(np.eye(2), np.array([3.0, 4.0]))
    g = GroupStructure.contiguous([2])
    fit = fit_group_lasso(data, g, np.array([1.0]), 2.5)
    np.testing.assert_allclose(fit.beta, [1.5, 2.0], atol=1e-12)


def test_group_lasso_orthonormal(rng):
    data = orthonormal_dataset(rng, 40, 12)
    g = GroupStructure.contiguous([3, 3, 3, 3])
    w = np.sqrt(g.sizes)
    ls = fit_ols(data)
    gamma = 0.5 * null_gamma_group(data, g, w)
    fit = fit_group_lasso(data, g, w, gamma)
    L = g.norms(ls)
    shrink = np.maximum(0.0, 1 - gamma * w / L)[g.assignment]
    np.testing.assert_allclose(fit.beta, shrink * ls, atol=1e-10)
    assert group_kkt(data, fit.beta, g, w, gamma) <= 1e-8


def test_group_null_threshold(rng):
    data = general_dataset(rng, 40, 6)
    g = GroupStructure.contiguous([2, 2, 2])
    w = np.ones(3)
    g0 = null_gamma_group(data, g, w)
    assert np.all(fit_group_lasso(data, g, w, g0).beta == 0)


def test_group_general_kkt(rng):
    data = general_dataset(rng, 60, 9, rho=0.6)
    g = GroupStructure(np.array([0, 1, 2, 0, 1, 2, 0, 1, 2]))
    w = np.array([1.0, 2.0, 0.5])
    gamma = 0.2 * null_gamma_group(data, g, w)
    fit = fit_group_lasso(data, g, w, gamma)
    assert fit.converged and fit.kkt_residual <= 1e-8


def test_adaptive_group_reductions(rng):
    data = general_dataset(rng, 50, 6)
    g = GroupStructure.contiguous([3, 3])
    w = np.array([1.3, 0.7])
    a = fit_adaptive_group_lasso(data, g, Fixed(w), 2.0)
    b = fit_group_lasso(data, g, w, 2.0)
    np.testing.assert_array_equal(a.beta, b.beta)
    single = GroupStructure.singletons(6)
    agl = fit_adaptive_group_lasso(data, single, GroupInverseNorm(), 1.5)
    al = fit_adaptive_lasso(data, InversePower(1.0), 1.5)
    np.testing.assert_allclose(agl.beta, al.beta, atol=1e-8)


def test_path_endpoints_and_nesting(rng):
    data = orthonormal_dataset(rng, 40, 8)
    path = compute_path(data, Lasso(), SolverConfig(grid_size=40, grid_decades=6))
    assert path.fits[0].active.size == 0
    assert path.dofs[0].value == 0
    np.testing.assert_allclose(path.fits[-1].beta, fit_ols(data), atol=1e-5)
    sizes = [f.active.size for f in path.fits]
    assert sizes == sorted(sizes)
    for a, b in zip(path.fits[:-1], path.fits[1:]):
        assert set(a.active.A_p) <= set(b.active.A_p)


def test_transitions(rng):
    data = Dataset(np.eye(2), np.array([3.0, 0.0]))
    path = compute_path(data, Lasso(), gammas=[5.0, 4.0, 2.0, 1.0])
    assert detect_transitions(path) == [3.0]
    path = compute_path(data, Lasso(), gammas=[2.0, 1.0])
    assert detect_transitions(path) == []
    data = general_dataset(rng, 50, 9)
    path = compute_path(data, AdaptiveLasso(InversePower(1.0)),
                        SolverConfig(grid_size=30))
    for t in path.transitions:
        i = int(np.searchsorted(-path.gammas, -t))
        assert not path.fits[i - 1].active.same_as(path.fits[i].active)


def test_record_fits(rng):
    data = general_dataset(rng, 30, 5)
    with record_fits() as log:
        compute_path(data, GroupLasso(GroupStructure.contiguous([2, 3])),
                     SolverConfig(grid_size=10))
    assert log.count == 10 and log.max_kkt <= 1e-8


def test_debug_objective_trace_decreases(rng):
    data = general_dataset(rng, 40, 6, rho=0.8)
    fit = fit_weighted_lasso(data, np.ones(6), 1.0, SolverConfig(debug=True))
    assert fit.objective_trace is not None and fit.objective_trace.size > 0
    assert np.all(np.diff(fit.objective_trace) <= 1e-10)
