"""Dense linear algebra helpers shared by the solvers and the df estimators."""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike, NDArray

from .errors import NoConvergence, NotPositiveDefinite, RankDeficient, Singular

SYMMETRY_TOL = 1e-12


def _check_symmetric(S: NDArray, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    if S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if np.max(np.abs(S - S.T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric")


def cholesky_factor(G: ArrayLike) -> tuple[NDArray, bool]:
    """Cholesky factor with an explicit pivot test.

    Raises NotPositiveDefinite when the factorization fails or a squared pivot
    falls below 1e-14 times the largest diagonal entry.
    """
    G = np.asarray(G, dtype=float)
    _check_symmetric(G, SYMMETRY_TOL)
    if G.shape[0] == 0:
        return G.copy(), True
    try:
        c, lower = sla.cho_factor(G, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(c) ** 2
    if np.min(pivots) <= 1e-14 * np.max(np.diag(G)):
        raise NotPositiveDefinite(
            f"pivot {np.min(pivots):.3g} below tolerance")
    return c, lower


def cholesky_solve(G: ArrayLike, rhs: ArrayLike) -> NDArray:
    """Solve ``G x = rhs`` for symmetric positive definite ``G``."""
    rhs = np.asarray(rhs, dtype=float)
    factor = cholesky_factor(G)
    if rhs.shape[0] == 0:
        return rhs.copy()
    return sla.cho_solve(factor, rhs)


def cholesky_inverse(G: ArrayLike) -> NDArray:
    G = np.asarray(G, dtype=float)
    return cholesky_solve(G, np.eye(G.shape[0]))


def qr_least_squares(X: ArrayLike, y: ArrayLike) -> NDArray:
    """Least squares via a thin QR factorization.

    One step of iterative refinement on the normal equations keeps the
    residual ``X^T (y - X b)`` at roundoff level for moderately conditioned X.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n < p:
        raise RankDeficient(f"n={n} < p={p}")
    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    xnorm = np.linalg.norm(X, 2) if p else 0.0
    if p and np.min(diag) <= 1e-10 * xnorm:
        j = int(np.argmin(diag))
        raise RankDeficient(f"design is rank deficient near column {j}")
    beta = sla.solve_triangular(R, Q.T @ y)
    resid = y - X @ beta
    beta = beta + sla.solve_triangular(R, Q.T @ resid)
    return beta


def sym_eig(S: ArrayLike, tol: float = 1e-10) -> tuple[NDArray, NDArray]:
    """Eigenvalues in descending order with matching orthonormal eigenvectors."""
    S = np.asarray(S, dtype=float)
    _check_symmetric(S, tol)
    S = 0.5 * (S + S.T)
    try:
        vals, vecs = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from None
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def trace_of_solve(M: ArrayLike, N: ArrayLike) -> float:
    """Return ``trace(M^{-1} N)`` using an LU solve."""
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    if M.shape[0] == 0:
        return 0.0
    try:
        with warnings.catch_warnings():
            # singularity is reported below through the pivot check
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(M, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise Singular(str(exc)) from None
    piv = np.abs(np.diag(lu[0]))
    if np.min(piv) <= 1e-14 * max(1.0, np.max(piv)):
        raise Singular("matrix is numerically singular")
    return float(np.trace(sla.lu_solve(lu, N)))


def trace_pushthrough(X: ArrayLike, K_solve: ArrayLike, K_rhs: ArrayLike,
                      gram: ArrayLike | None = None, dense: bool = False) -> float:
    """``trace[(I_n + X K_solve X^T)^{-1} X K_rhs X^T]`` for an n x k matrix X.

    The default route uses ``(I + X K X^T)^{-1} X = X (I_k + K X^T X)^{-1}``
    so only a k x k system is solved.  ``dense=True`` forms the n x n
    operators instead; it exists to cross-check the reduction.
    """
    X = np.asarray(X, dtype=float)
    K_solve = np.asarray(K_solve, dtype=float)
    K_rhs = np.asarray(K_rhs, dtype=float)
    n, k = X.shape
    if k == 0:
        return 0.0
    if dense:
        M = np.eye(n) + X @ K_solve @ X.T
        N = X @ K_rhs @ X.T
        return trace_of_solve(M, N)
    G = X.T @ X if gram is None else np.asarray(gram, dtype=float)
    return trace_of_solve(np.eye(k) + K_solve @ G, K_rhs @ G)
