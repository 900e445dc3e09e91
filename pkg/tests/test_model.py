import numpy as np
import pytest

from lassodf.errors import ConfigError, ConstantColumn, DegenerateWeight
from lassodf.model import (ActiveSets, AdaptiveGroupLasso, AdaptiveLasso, Dataset,
                           ExponentialDecay, Fixed, GroupInverseNorm, GroupLasso,
                           GroupStructure, InversePower, standardize)
from lassodf.weights import weight_and_derivative


def test_standardize_is_idempotent(rng):
    raw = Dataset(rng.standard_normal((40, 5)) * 3 + 1, rng.standard_normal(40))
    once = standardize(raw)
    twice = standardize(once)
    np.testing.assert_allclose(twice.X, once.X, atol=1e-12)
    np.testing.assert_allclose(once.X.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(once.X, axis=0), np.sqrt(40), rtol=1e-12)


def test_destandardize_round_trip(rng):
    X = np.column_stack([[1.0, 2.0, 3.0, 4.0], [2.0, 0.0, 1.0, 5.0]])
    raw = Dataset(X, np.array([1.0, 0.0, 2.0, 3.0]))
    std = standardize(raw)
    beta = np.array([0.7, -0.2])
    b0, b = std.destandardize(beta)
    np.testing.assert_allclose(b0 + X @ b, std.X @ beta + std.y_offset, atol=1e-12)


def test_standardize_orthonormalize(rng):
    raw = Dataset(rng.standard_normal((100, 30)), rng.standard_normal(100))
    std = standardize(raw, orthonormalize=True)
    assert np.max(np.abs(std.gram - np.eye(30))) <= 1e-10
    assert std.is_orthonormal
    beta = rng.standard_normal(30)
    b0, b = std.destandardize(beta)
    np.testing.assert_allclose(b0 + raw.X @ b, std.X @ beta + std.y_offset, atol=1e-10)


def test_standardize_constant_column(rng):
    X = np.column_stack([rng.standard_normal(10), np.ones(10)])
    with pytest.raises(ConstantColumn):
        standardize(Dataset(X, rng.standard_normal(10)))


def test_group_structure():
    g = GroupStructure.contiguous([3, 2])
    assert g.n_groups == 2
    np.testing.assert_array_equal(g.sizes, [3, 2])
    np.testing.assert_array_equal(g.members(1), [3, 4])
    np.testing.assert_allclose(g.norms([3, 4, 0, 0, 2]), [5, 2])
    assert GroupStructure.singletons(4).n_groups == 4


def test_active_sets():
    g = GroupStructure.contiguous([2, 2, 2])
    act = ActiveSets.from_beta(np.array([0, 1.0, 0, 0, 2.0, -1.0]), g)
    np.testing.assert_array_equal(act.A_p, [1, 4, 5])
    np.testing.assert_array_equal(act.A_G, [0, 2])
    assert act.size == 3 and act.n_groups == 2
    np.testing.assert_array_equal(act.group_columns(g), [0, 1, 4, 5])


def test_penalty_validation():
    g = GroupStructure.contiguous([3, 3])
    np.testing.assert_allclose(GroupLasso(g).weights, np.sqrt([3, 3]))
    assert isinstance(AdaptiveLasso(GroupInverseNorm()).scheme, InversePower)
    with pytest.raises(ConfigError):
        AdaptiveGroupLasso(g, InversePower(2.0))


def test_weight_derivatives():
    w, dw = weight_and_derivative(InversePower(1.0), np.array([2.0]))
    np.testing.assert_allclose([w[0], dw[0]], [0.5, -0.25])
    w, dw = weight_and_derivative(ExponentialDecay(1.0), np.array([np.log(2.0)]))
    np.testing.assert_allclose([w[0], dw[0]], [0.5, -0.5])
    w, dw = weight_and_derivative(Fixed(np.array([1.0, 2.0])), np.array([0.0, 3.0]))
    np.testing.assert_array_equal(dw, [0.0, 0.0])
    w, dw = weight_and_derivative(GroupInverseNorm(), np.array([4.0]))
    np.testing.assert_allclose([w[0], dw[0]], [0.25, -1 / 16])
    with pytest.raises(DegenerateWeight):
        weight_and_derivative(InversePower(1.0), np.array([1.0, 0.0]))
