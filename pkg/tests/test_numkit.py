import numpy as np
import pytest

from lassodf.errors import NotPositiveDefinite, RankDeficient, Singular
from lassodf.numkit import (cholesky_inverse, cholesky_solve, qr_least_squares,
                            sym_eig, trace_of_solve, trace_pushthrough)


def spd(rng, k):
    A = rng.standard_normal((k, k))
    return A @ A.T + k * np.eye(k)


def test_cholesky_identity_and_diagonal():
    np.testing.assert_allclose(cholesky_solve(np.eye(3), [1, 2, 3]), [1, 2, 3])
    np.testing.assert_allclose(cholesky_solve(np.diag([2.0, 4.0]), [2, 4]), [1, 1])


def test_cholesky_random_residual(rng):
    G = spd(rng, 8)
    b = rng.standard_normal(8)
    x = cholesky_solve(G, b)
    assert np.max(np.abs(G @ x - b)) <= 1e-10
    np.testing.assert_allclose(cholesky_inverse(G) @ G, np.eye(8), atol=1e-10)


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        cholesky_solve(np.array([[1.0, 2.0], [2.0, 1.0]]), [1.0, 1.0])


def test_qr_small_cases():
    np.testing.assert_allclose(qr_least_squares(np.eye(2), [3, -1]), [3, -1])
    np.testing.assert_allclose(qr_least_squares([[1.0], [1.0]], [1, 3]), [2])


def test_qr_exact_recovery(rng):
    X = rng.standard_normal((50, 10))
    beta = rng.standard_normal(10)
    np.testing.assert_allclose(qr_least_squares(X, X @ beta), beta, atol=1e-9)


def test_qr_rank_deficient(rng):
    X = rng.standard_normal((20, 3))
    X = np.column_stack([X, X[:, 0] + X[:, 1]])
    with pytest.raises(RankDeficient):
        qr_least_squares(X, rng.standard_normal(20))


def test_sym_eig_cases(rng):
    vals, _ = sym_eig(np.diag([1.0, 3.0]))
    np.testing.assert_allclose(vals, [3, 1])
    vals, _ = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(vals, [1, -1])
    A = rng.standard_normal((6, 6))
    S = A + A.T
    vals, V = sym_eig(S)
    assert np.all(np.diff(vals) <= 0)
    assert np.linalg.norm(V @ np.diag(vals) @ V.T - S) <= 1e-9
    np.testing.assert_allclose(V.T @ V, np.eye(6), atol=1e-12)


def test_trace_of_solve(rng):
    N = rng.standard_normal((5, 5))
    assert trace_of_solve(np.eye(5), N) == pytest.approx(np.trace(N))
    assert trace_of_solve(2 * np.eye(4), np.eye(4)) == pytest.approx(2.0)
    M = spd(rng, 10)
    N = rng.standard_normal((10, 10))
    assert abs(trace_of_solve(M, N) - np.trace(np.linalg.inv(M) @ N)) <= 1e-10
    with pytest.raises(Singular):
        trace_of_solve(np.zeros((3, 3)), np.eye(3))


def test_pushthrough_matches_dense(rng):
    X = rng.standard_normal((15, 4))
    Ks = spd(rng, 4) * 0.1
    Kr = rng.standard_normal((4, 4))
    n = X.shape[0]
    ref = np.trace(np.linalg.solve(np.eye(n) + X @ Ks @ X.T, X @ Kr @ X.T))
    assert trace_pushthrough(X, Ks, Kr) == pytest.approx(ref, rel=1e-10)
    assert trace_pushthrough(X, Ks, Kr, dense=True) == pytest.approx(ref, rel=1e-10)
