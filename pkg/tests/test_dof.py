import numpy as np
import pytest

from conftest import general_dataset, orthonormal_dataset
from lassodf.dof import (adaptive_lower_bound_premise, agl_closed_form_ortho,
                         agl_closed_form_shared_denominator, build_phi, build_pi,
                         check_bounds, df_adaptive_group_lasso, df_adaptive_lasso,
                         df_group_lasso, df_group_lasso_closed_ortho, df_lasso,
                         slopes_along_path)
from lassodf.errors import InactiveGroupRequested
from lassodf.model import (ActiveSets, AdaptiveLasso, Dataset, ExponentialDecay,
                           FitResult, Fixed, GroupInverseNorm, GroupStructure,
                           InversePower)
from lassodf.oracle import df_divergence_fd
from lassodf.solvers import (SolverConfig, compute_path, fit_adaptive_group_lasso,
                             fit_adaptive_lasso, fit_group_lasso, fit_ols,
                             fit_weighted_lasso, null_gamma_group)


def make_fit(beta, groups, w, gamma=1.0, beta_ls=None):
    beta = np.asarray(beta, float)
    return FitResult(beta, gamma, ActiveSets.from_beta(beta, groups), 0.0, 0, True,
                     np.asarray(w, float), beta_ls)


def test_df_lasso():
    assert df_lasso(ActiveSets.from_beta(np.zeros(4))).value == 0
    assert df_lasso(ActiveSets.from_beta(np.array([1.0, 2, 0, 3, 4, 5]))).value == 5


def test_adaptive_lasso_scalar_case():
    data = Dataset([[1.0]], [2.0])
    fit = fit_adaptive_lasso(data, InversePower(1.0), 1.0)
    est = df_adaptive_lasso(fit, fit.beta_ls, InversePower(1.0), 1.0, data=data)
    assert est.value == pytest.approx(1.25, abs=1e-12)

    def fitter(y):
        return data.X @ fit_adaptive_lasso(data.with_response(y), InversePower(1.0), 1.0).beta
    assert df_divergence_fd(fitter, data.y) == pytest.approx(1.25, abs=1e-6)


def test_adaptive_lasso_fixed_weights(rng):
    data = general_dataset(rng, 40, 6)
    fit = fit_adaptive_lasso(data, Fixed(np.ones(6)), 2.0)
    est = df_adaptive_lasso(fit, fit.beta_ls, Fixed(np.ones(6)), 2.0, data=data)
    assert est.value == fit.active.size


def test_adaptive_lasso_exponential_orthonormal(rng):
    data = orthonormal_dataset(rng, 30, 6, sigma=0.5)
    scheme = ExponentialDecay(0.7)
    fit = fit_adaptive_lasso(data, scheme, 0.3)
    A = fit.active.A_p
    expected = A.size + 0.3 * 0.7 * np.sum(np.exp(-0.7 * np.abs(fit.beta_ls[A])))
    est = df_adaptive_lasso(fit, fit.beta_ls, scheme, 0.3, data=data)
    assert est.value == pytest.approx(expected, abs=1e-12)

    def fitter(y):
        return data.X @ fit_adaptive_lasso(data.with_response(y), scheme, 0.3).beta
    assert df_divergence_fd(fitter, data.y) == pytest.approx(expected, rel=1e-4)


def test_group_lasso_seven_thirds():
    data = Dataset(np.eye(3), np.array([1.0, 2.0, 2.0]))
    g = GroupStructure.contiguous([3])
    w = np.array([1.0])
    fit = fit_group_lasso(data, g, w, 1.0)
    assert np.linalg.norm(fit.beta) == pytest.approx(2.0)
    est = df_group_lasso(fit, g, w, 1.0, data=data)
    assert est.value == pytest.approx(7 / 3, abs=1e-12)
    fa, fb = df_group_lasso_closed_ortho(fit.active, g, w, 1.0, g.norms(fit.beta))
    assert fa == pytest.approx(7 / 3, abs=1e-12) and fb == pytest.approx(7 / 3, abs=1e-12)
    assert df_group_lasso_closed_ortho(fit.active, g, w, 0.0, g.norms(fit.beta)) == (3.0, 3.0)


def test_group_lasso_gamma_zero_and_singletons(rng):
    data = general_dataset(rng, 40, 6)
    g = GroupStructure.contiguous([3, 3])
    w = np.ones(2)
    fit = fit_group_lasso(data, g, w, 1e-3)
    assert df_group_lasso(fit, g, w, 0.0, data=data).value == pytest.approx(6.0, abs=1e-10)
    s = GroupStructure.singletons(6)
    fit = fit_group_lasso(data, s, np.ones(6), 5.0)
    assert df_group_lasso(fit, s, np.ones(6), 5.0, data=data).value == pytest.approx(
        fit.active.size, abs=1e-10)


def test_group_closed_forms_agree(rng):
    for _ in range(20):
        data = orthonormal_dataset(rng, 40, 15)
        g = GroupStructure.contiguous([1, 2, 3, 4, 5])
        w = rng.uniform(0.5, 2.0, 5)
        gamma = rng.uniform(0.1, 0.6) * null_gamma_group(data, g, w)
        fit = fit_group_lasso(data, g, w, gamma)
        fa, fb = df_group_lasso_closed_ortho(fit.active, g, w, gamma, g.norms(fit.beta))
        assert abs(fa - fb) <= 1e-12 * max(1, fa)
        est = df_group_lasso(fit, g, w, gamma, data=data)
        assert est.value == pytest.approx(fa, abs=1e-10)
        dense = df_group_lasso(fit, g, w, gamma, data=data, dense=True, design="general")
        assert dense.value == pytest.approx(fa, abs=1e-10)


def test_build_pi_blocks(rng):
    g = GroupStructure.contiguous([2, 1])
    fit = make_fit([2.0, 0.0, -3.0], g, [1.0, 1.0])
    pi = build_pi(fit, g, np.array([1.0, 1.0]))
    np.testing.assert_allclose(pi.blocks[0], [[0, 0], [0, 0.5]])
    np.testing.assert_allclose(pi.blocks[1], [[0.0]])
    b = rng.standard_normal(4)
    g4 = GroupStructure.contiguous([4])
    blk = build_pi(make_fit(b, g4, [1.7]), g4, np.array([1.7])).blocks[0]
    ev = np.sort(np.linalg.eigvalsh(blk))
    r = np.linalg.norm(b)
    np.testing.assert_allclose(ev, [0] + [1.7 / r] * 3, atol=1e-10)
    fit = make_fit([1.0, 1.0, 0.0], g, [1.0, 1.0])
    with pytest.raises(InactiveGroupRequested):
        build_pi(fit, g, np.ones(2), requested=np.array([1]))


def test_build_phi(rng):
    g = GroupStructure.contiguous([3, 3])
    beta = rng.standard_normal(6)
    ls = rng.standard_normal(6)
    fit = make_fit(beta, g, [1.0, 1.0], beta_ls=ls)
    phi = build_phi(fit, ls, g, Fixed(np.ones(2)))
    assert np.all(phi.dense() == 0)
    phi = build_phi(fit, ls, g, GroupInverseNorm())
    for blk in phi.blocks:
        assert np.linalg.matrix_rank(blk, tol=1e-12) <= 1
    s = GroupStructure.singletons(3)
    b = np.array([1.0, -2.0, 0.5])
    l3 = np.array([2.0, 3.0, -1.0])
    phi = build_phi(make_fit(b, s, 1 / np.abs(l3), beta_ls=l3), l3, s, GroupInverseNorm())
    np.testing.assert_allclose(np.diag(phi.dense()),
                               np.sign(b) * np.sign(l3) * (-1 / l3 ** 2))


def test_agl_fixed_equals_group_lasso(rng):
    data = general_dataset(rng, 50, 9)
    g = GroupStructure.contiguous([3, 3, 3])
    w = np.sqrt(g.sizes)
    fit = fit_adaptive_group_lasso(data, g, Fixed(w), 1.0)
    a = df_adaptive_group_lasso(fit, fit.beta_ls, g, Fixed(w), 1.0, data=data)
    b = df_group_lasso(fit, g, w, 1.0, data=data)
    assert a.value == b.value


def test_agl_singletons_reduce_to_adaptive_lasso(rng):
    data = general_dataset(rng, 50, 6)
    s = GroupStructure.singletons(6)
    fit = fit_adaptive_group_lasso(data, s, GroupInverseNorm(), 1.0)
    agl = df_adaptive_group_lasso(fit, fit.beta_ls, s, GroupInverseNorm(), 1.0, data=data)
    al = df_adaptive_lasso(fit, fit.beta_ls, InversePower(1.0), 1.0, data=data)
    assert agl.value == pytest.approx(al.value, abs=1e-10)


def test_agl_orthonormal_closed_form(rng):
    data = orthonormal_dataset(rng, 40, 12)
    g = GroupStructure.contiguous([3, 3, 3, 3])
    fit = fit_adaptive_group_lasso(data, g, GroupInverseNorm(), 0.5)
    est = df_adaptive_group_lasso(fit, fit.beta_ls, g, GroupInverseNorm(), 0.5, data=data)
    args = (fit.active, g, fit.weights, 0.5, g.norms(fit.beta), g.norms(fit.beta_ls))
    assert est.value == pytest.approx(agl_closed_form_ortho(*args), abs=1e-10)

    def fitter(y):
        d = data.with_response(y)
        return data.X @ fit_adaptive_group_lasso(d, g, GroupInverseNorm(), 0.5).beta
    assert df_divergence_fd(fitter, data.y) == pytest.approx(est.value, rel=1e-5)
    # dividing the weight-derivative term by the shrinkage factor is not the same
    assert abs(agl_closed_form_shared_denominator(*args) - est.value) > 1e-6


def test_agl_general_matches_divergence(rng):
    data = general_dataset(rng, 40, 9, rho=0.5)
    g = GroupStructure.contiguous([3, 3, 3])
    gamma = 0.3 * null_gamma_group(data, g, np.ones(3)) / 3
    fit = fit_adaptive_group_lasso(data, g, GroupInverseNorm(), gamma)
    est = df_adaptive_group_lasso(fit, fit.beta_ls, g, GroupInverseNorm(), gamma, data=data)
    dense = df_adaptive_group_lasso(fit, fit.beta_ls, g, GroupInverseNorm(), gamma,
                                    data=data, dense=True)
    assert est.value == pytest.approx(dense.value, abs=1e-10)

    def fitter(y):
        d = data.with_response(y)
        return data.X @ fit_adaptive_group_lasso(d, g, GroupInverseNorm(), gamma).beta
    assert df_divergence_fd(fitter, data.y) == pytest.approx(est.value, rel=1e-4)


def test_bounds(rng):
    g = GroupStructure.contiguous([3, 3])
    data = general_dataset(rng, 30, 6)
    empty = fit_group_lasso(data, g, np.ones(2), 1e6)
    est = df_group_lasso(empty, g, np.ones(2), 1e6, data=data)
    assert est.value == 0 and check_bounds(est)
    for _ in range(20):
        data = general_dataset(rng, 30, 6, rho=0.5)
        gamma = rng.uniform(0.05, 0.9) * null_gamma_group(data, g, np.ones(2))
        fit = fit_adaptive_group_lasso(data, g, GroupInverseNorm(), gamma / 3)
        plain = df_group_lasso(fit, g, fit.weights, fit.gamma, data=data)
        assert check_bounds(plain)
        adaptive = df_adaptive_group_lasso(fit, fit.beta_ls, g, GroupInverseNorm(),
                                           fit.gamma, data=data)
        premise = adaptive_lower_bound_premise(fit, fit.beta_ls, g)
        assert check_bounds(adaptive, plain, premise)


def test_slopes_fixed_and_single_interval(rng):
    data = orthonormal_dataset(rng, 30, 5)
    path = compute_path(data, AdaptiveLasso(Fixed(np.ones(5))), SolverConfig(grid_size=20))
    assert all(s.slope == 0 for s in slopes_along_path(path))
    data = Dataset(np.eye(2), np.array([3.0, 0.2]))
    path = compute_path(data, AdaptiveLasso(InversePower(1.0)), gammas=[0.4, 0.3, 0.2])
    (s,) = slopes_along_path(path)
    assert s.active_size == 1
    assert s.slope == pytest.approx(1 / 9, rel=1e-10)
    data = Dataset(np.eye(3), np.array([3.0, -2.0, 1.5]))
    path = compute_path(data, AdaptiveLasso(InversePower(1.0)), gammas=[0.5, 0.4])
    (s,) = slopes_along_path(path)
    assert s.slope == pytest.approx(1 / 9 + 1 / 4 + 1 / 1.5 ** 2, rel=1e-10)
