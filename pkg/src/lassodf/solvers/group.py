"""Group lasso and adaptive group lasso fits."""
from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import NotPositiveDefinite
from ..model import ActiveSets, Dataset, FitResult, GroupStructure, WeightScheme
from ..numkit import cholesky_solve
from ..weights import weight_and_derivative
from ._kernels import bcd_group
from .config import DEFAULT_CONFIG, SolverConfig, _report
from .lasso import fit_ols

log = logging.getLogger(__name__)

_CHUNK = 500


class GroupWorkspace:
    """Per-(design, groups) precomputation reused along a path."""

    def __init__(self, data: Dataset, groups: GroupStructure):
        if groups.p != data.p:
            raise ValueError("group assignment length does not match design")
        self.groups = groups
        self.order = np.concatenate([groups.members(g)
                                     for g in range(groups.n_groups)]).astype(np.int64)
        self.starts = np.concatenate([[0], np.cumsum(groups.sizes)]).astype(np.int64)
        m = int(groups.sizes.max())
        self.eigvals = np.ones((groups.n_groups, m))
        self.eigvecs = np.zeros((groups.n_groups, m, m))
        for g in range(groups.n_groups):
            idx = groups.members(g)
            d, V = np.linalg.eigh(data.gram[np.ix_(idx, idx)])
            self.eigvals[g, :idx.size] = d
            self.eigvecs[g, :idx.size, :idx.size] = V


def group_gradient_norms(data: Dataset, beta: NDArray, groups: GroupStructure) -> NDArray:
    g = data.X.T @ (data.y - data.X @ beta)
    return groups.norms(g)


def null_gamma_group(data: Dataset, groups: GroupStructure, w: ArrayLike) -> float:
    return float(np.max(groups.norms(data.xty) / np.asarray(w)))


def group_kkt(data: Dataset, beta: NDArray, groups: GroupStructure,
              w: NDArray, gamma: float) -> float:
    """Largest groupwise violation of the group-lasso optimality conditions."""
    g = data.X.T @ (data.y - data.X @ beta)
    norms = groups.norms(beta)
    act = norms > 0
    per_var = norms[groups.assignment]
    on = per_var > 0
    r = np.where(on, -g + gamma * w[groups.assignment] * beta
                 / np.where(on, per_var, 1.0), 0.0)
    res = np.where(act, groups.norms(r),
                   np.maximum(0.0, groups.norms(g) - gamma * w))
    return float(res.max(initial=0.0))


def _polish(data: Dataset, beta: NDArray, groups: GroupStructure,
            w: NDArray, gamma: float) -> NDArray | None:
    # Newton iterations on the optimality conditions of the active groups.
    norms = groups.norms(beta)
    act = np.flatnonzero(norms > 0)
    if act.size == 0:
        return beta.copy()
    cols = np.flatnonzero(np.isin(groups.assignment, act))
    local = np.searchsorted(act, groups.assignment[cols])
    G = data.gram[np.ix_(cols, cols)]
    c = data.xty[cols]
    wl = w[act][local]
    b = beta[cols].copy()
    scale = 1.0 + float(np.max(np.abs(c)))
    for _ in range(50):
        r = np.sqrt(np.bincount(local, weights=b * b, minlength=act.size))
        if np.any(r <= 0):
            return None
        rl = r[local]
        F = G @ b - c + gamma * wl * b / rl
        if np.max(np.abs(F)) <= 1e-15 * scale:
            break
        same = local[:, None] == local[None, :]
        J = G + gamma * (np.diag(wl / rl)
                         - same * np.outer(b, b) * (wl / rl ** 3)[:, None])
        try:
            step = cholesky_solve(J, F)
        except (NotPositiveDefinite, ValueError):
            return None
        b_new = b - step
        r_new = np.sqrt(np.bincount(local, weights=b_new * b_new, minlength=act.size))
        if np.any(r_new < 0.5 * r):
            return None
        done = np.max(np.abs(step)) <= 1e-16 * (1.0 + np.max(np.abs(b)))
        b = b_new
        if done:
            break
    out = np.zeros_like(beta)
    out[cols] = b
    return out


def fit_group_lasso(data: Dataset, groups: GroupStructure, w: ArrayLike,
                    gamma: float, config: SolverConfig = DEFAULT_CONFIG,
                    beta0: ArrayLike | None = None,
                    beta_ls: NDArray | None = None,
                    workspace: GroupWorkspace | None = None) -> FitResult:
    """Minimize 0.5||y - X b||^2 + gamma * sum_g w_g ||b_g||_2."""
    w = np.asarray(w, dtype=float)
    if w.shape != (groups.n_groups,) or np.any(~(w > 0)) or not np.all(np.isfinite(w)):
        raise ValueError("group weights must be finite, positive, one per group")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    ws = workspace if workspace is not None else GroupWorkspace(data, groups)
    thresh = gamma * w
    beta = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float)
    gram = np.ascontiguousarray(data.gram)
    xty = np.ascontiguousarray(data.xty)
    grad = xty - gram @ beta
    scale = 1.0 + float(np.linalg.norm(data.y))
    inner_tol = 1e-9 * scale
    trace = np.empty(config.max_iterations if config.debug else 0)
    total = 0
    kkt = np.inf
    while total < config.max_iterations:
        chunk = min(_CHUNK, config.max_iterations - total)
        view = trace[total:total + chunk]
        total += bcd_group(gram, xty, ws.order, ws.starts, ws.eigvals, ws.eigvecs,
                           thresh, beta, grad, chunk, inner_tol, view)
        kkt = group_kkt(data, beta, groups, w, gamma)
        cand = _polish(data, beta, groups, w, gamma)
        if cand is not None:
            kkt_c = group_kkt(data, cand, groups, w, gamma)
            if kkt_c <= kkt:
                beta, kkt = cand, kkt_c
                grad = xty - gram @ beta
        if kkt <= config.tol:
            break
        inner_tol = max(inner_tol * 1e-2, 1e-15 * scale)
    converged = kkt <= config.tol
    if not converged:
        log.warning("group fit at gamma=%.6g stopped with KKT residual %.3g",
                    gamma, kkt)
    obj = trace[:total].copy() if config.debug else None
    return _report(FitResult(beta, float(gamma), ActiveSets.from_beta(beta, groups),
                             kkt, total, converged, w.copy(), beta_ls, obj))


def adaptive_group_weights(scheme: WeightScheme, beta_ls: NDArray,
                           groups: GroupStructure) -> NDArray:
    return weight_and_derivative(scheme, groups.norms(beta_ls))[0]


def fit_adaptive_group_lasso(data: Dataset, groups: GroupStructure,
                             scheme: WeightScheme, gamma: float,
                             config: SolverConfig = DEFAULT_CONFIG,
                             beta0: ArrayLike | None = None,
                             beta_ls: NDArray | None = None,
                             workspace: GroupWorkspace | None = None) -> FitResult:
    """Group lasso with weights from the blockwise norms of the OLS fit."""
    if beta_ls is None:
        beta_ls = fit_ols(data)
    w = adaptive_group_weights(scheme, beta_ls, groups)
    return fit_group_lasso(data, groups, w, gamma, config, beta0, beta_ls, workspace)
