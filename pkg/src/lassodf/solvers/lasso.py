"""Least squares and (weighted) lasso fits."""
from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import NotPositiveDefinite
from ..model import ActiveSets, Dataset, FitResult, WeightScheme
from ..numkit import cholesky_solve, qr_least_squares
from ..weights import weight_and_derivative
from ._kernels import cd_lasso
from .config import DEFAULT_CONFIG, SolverConfig, _report

log = logging.getLogger(__name__)

_CHUNK = 500


def fit_ols(data: Dataset) -> NDArray:
    """Ordinary least squares coefficients."""
    return qr_least_squares(data.X, data.y)


def soft_threshold(z, t):
    """sign(z) * max(|z| - t, 0), elementwise."""
    z = np.asarray(z, dtype=float)
    out = np.sign(z) * np.maximum(np.abs(z) - t, 0.0)
    return float(out) if out.ndim == 0 else out


def lasso_kkt(data: Dataset, beta: NDArray, w: NDArray, gamma: float) -> float:
    """Largest violation of the weighted-lasso optimality conditions."""
    g = data.X.T @ (data.y - data.X @ beta)
    thr = gamma * w
    act = beta != 0
    res = np.where(act, np.abs(-g + thr * np.sign(beta)),
                   np.maximum(0.0, np.abs(g) - thr))
    return float(res.max(initial=0.0))


def null_gamma_lasso(data: Dataset, w: ArrayLike) -> float:
    """Smallest gamma at which the weighted lasso solution is zero."""
    return float(np.max(np.abs(data.xty) / np.asarray(w)))


def _polish(data: Dataset, beta: NDArray, thresh: NDArray) -> NDArray | None:
    # Solve the optimality conditions on the current support with its signs.
    A = np.flatnonzero(beta)
    if A.size == 0:
        return beta.copy()
    s = np.sign(beta[A])
    try:
        bA = cholesky_solve(data.gram[np.ix_(A, A)], data.xty[A] - thresh[A] * s)
    except NotPositiveDefinite:
        return None
    if np.any(np.sign(bA) != s):
        return None
    out = np.zeros_like(beta)
    out[A] = bA
    return out


def fit_weighted_lasso(data: Dataset, w: ArrayLike, gamma: float,
                       config: SolverConfig = DEFAULT_CONFIG,
                       beta0: ArrayLike | None = None,
                       beta_ls: NDArray | None = None) -> FitResult:
    """Minimize 0.5||y - X b||^2 + gamma * sum_j w_j |b_j|.

    Coordinate descent identifies the support; the optimality conditions are
    then solved exactly on that support, which drives the KKT residual to
    roundoff level.  An unconverged result is returned flagged rather than
    raised.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (data.p,) or np.any(~(w > 0)) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite, positive, one per column")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    thresh = gamma * w
    beta = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float)
    grad = data.xty - data.gram @ beta
    gram = np.ascontiguousarray(data.gram)
    xty = np.ascontiguousarray(data.xty)
    scale = 1.0 + float(np.linalg.norm(data.y))
    inner_tol = 1e-9 * scale
    trace = np.empty(config.max_iterations if config.debug else 0)
    total = 0
    kkt = np.inf
    while total < config.max_iterations:
        chunk = min(_CHUNK, config.max_iterations - total)
        view = trace[total:total + chunk]
        total += cd_lasso(gram, xty, thresh, beta, grad, chunk, inner_tol, view)
        kkt = lasso_kkt(data, beta, w, gamma)
        cand = _polish(data, beta, thresh)
        if cand is not None:
            kkt_c = lasso_kkt(data, cand, w, gamma)
            if kkt_c <= kkt:
                beta, kkt = cand, kkt_c
                grad = data.xty - data.gram @ beta
        if kkt <= config.tol:
            break
        inner_tol = max(inner_tol * 1e-2, 1e-15 * scale)
    converged = kkt <= config.tol
    if not converged:
        log.warning("lasso fit at gamma=%.6g stopped with KKT residual %.3g",
                    gamma, kkt)
    obj = trace[:total].copy() if config.debug else None
    return _report(FitResult(beta, float(gamma), ActiveSets.from_beta(beta), kkt,
                             total, converged, w.copy(), beta_ls, obj))


def adaptive_lasso_weights(scheme: WeightScheme, beta_ls: NDArray) -> NDArray:
    return weight_and_derivative(scheme, np.abs(beta_ls))[0]


def fit_adaptive_lasso(data: Dataset, scheme: WeightScheme, gamma: float,
                       config: SolverConfig = DEFAULT_CONFIG,
                       beta0: ArrayLike | None = None,
                       beta_ls: NDArray | None = None) -> FitResult:
    """Adaptive lasso: weights come from the OLS fit of the same data."""
    if beta_ls is None:
        beta_ls = fit_ols(data)
    w = adaptive_lasso_weights(scheme, beta_ls)
    return fit_weighted_lasso(data, w, gamma, config, beta0, beta_ls)
