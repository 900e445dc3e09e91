import numpy as np
import pytest

from conftest import general_dataset
from lassodf.errors import InsufficientDof
from lassodf.experiments import diabetes_like, run_dataset_pipeline
from lassodf.model import ActiveSets, Dataset, FitResult, Lasso
from lassodf.selection import (ACTIVE_SET, ANALYTIC, CriterionValue,
                               argmin_prefer_first, criteria, estimate_sigma2,
                               loo_cv, select_gamma)
from lassodf.solvers import SolverConfig, compute_path


def zero_fit(p, gamma=1.0):
    beta = np.zeros(p)
    return FitResult(beta, gamma, ActiveSets.from_beta(beta), 0.0, 0, True, np.ones(p))


def test_sigma2_hand_case():
    data = Dataset(np.ones((3, 1)), np.array([0.0, 0.0, 3.0]))
    assert estimate_sigma2(data) == pytest.approx(3.0)


def test_sigma2_noiseless_and_simulated(rng):
    X = rng.standard_normal((30, 4))
    assert estimate_sigma2(Dataset(X, X @ np.ones(4))) <= 1e-18
    X = rng.standard_normal((500, 10))
    y = X @ rng.standard_normal(10) + 2.0 * rng.standard_normal(500)
    assert 3.3 <= estimate_sigma2(Dataset(X, y)) <= 4.8
    with pytest.raises(InsufficientDof):
        estimate_sigma2(Dataset(X[:10], y[:10]))


def test_criteria_formulas():
    n, s2 = 20, 0.5
    y = np.full(n, np.sqrt(s2))        # rss = n * s2 for the zero fit
    data = Dataset(np.eye(n)[:, :2], y)
    c = criteria(zero_fit(2), 3.0, s2, data)
    assert c.bic == pytest.approx(1 + 3 * np.log(n) / n)
    assert c.aic == pytest.approx(1 + 6 / n)
    perfect = Dataset(np.eye(n)[:, :2], np.zeros(n))
    c = criteria(zero_fit(2), 0.0, 1.0, perfect)
    assert c.aic == 0 and c.bic == 0
    hi = criteria(zero_fit(2), 2.5, s2, data, ANALYTIC)
    lo = criteria(zero_fit(2), 2.0, s2, data, ACTIVE_SET)
    assert hi.bic > lo.bic


def test_argmin_rules():
    assert argmin_prefer_first([3.0, 2.0, 1.0, 2.0, 3.0]) == 2
    assert argmin_prefer_first([1.0, 1.0, 1.0]) == 0
    assert argmin_prefer_first([np.nan, 2.0, 1.0]) == 2


def test_select_gamma_flat_picks_largest(rng):
    data = general_dataset(rng, 30, 4)
    path = compute_path(data, Lasso(), SolverConfig(grid_size=5))
    path.criteria[ANALYTIC] = [CriterionValue(g, 1.0, 1.0, 1.0, 0.0, ANALYTIC)
                               for g in path.gammas]
    assert select_gamma(path, "bic") == path.gammas[0]
    vals = [(i - 2) ** 2 for i in range(5)]
    path.criteria[ANALYTIC] = [CriterionValue(g, v, v, 1.0, 0.0, ANALYTIC)
                               for g, v in zip(path.gammas, vals)]
    assert select_gamma(path, "aic") == path.gammas[2]


def test_naive_selects_larger_gamma_for_adaptive():
    for seed in range(4):
        rep = run_dataset_pipeline(diabetes_like(seed, n=200), "adaptive", cv=False,
                                   config=SolverConfig(grid_size=50))
        assert rep.selections["bic_naive"]["gamma"] >= rep.selections["bic_analytic"]["gamma"]


def test_loo_null_grid_and_noiseless(rng):
    X = rng.standard_normal((15, 3))
    y = rng.standard_normal(15)
    data = Dataset(X, y)
    res = loo_cv(data, Lasso(), [1e8])
    assert res.cv_error[0] == pytest.approx(np.mean(y ** 2))
    assert len(set(res.fold_hashes)) == 15
    clean = Dataset(X, X @ np.array([1.0, -2.0, 0.5]))
    res = loo_cv(clean, Lasso(), np.geomspace(10, 1e-4, 12))
    assert res.index == 11
