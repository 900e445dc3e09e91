"""Warm-started solution paths over a log-spaced gamma grid."""
from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import LassoDfError
from ..model import (AdaptiveGroupLasso, AdaptiveLasso, Dataset, FitResult,
                     GroupLasso, Lasso, PathResult, PenaltySpec)
from .config import DEFAULT_CONFIG, SolverConfig
from .group import (GroupWorkspace, adaptive_group_weights, fit_group_lasso,
                    null_gamma_group)
from .lasso import (adaptive_lasso_weights, fit_ols, fit_weighted_lasso,
                    null_gamma_lasso)

log = logging.getLogger(__name__)

TRANSITION_BAND = 1e-9


def penalty_weights(data: Dataset, penalty: PenaltySpec,
                    beta_ls: NDArray | None = None) -> tuple[NDArray, NDArray | None]:
    """Realized penalty weights, and the OLS fit when the weights need it."""
    if isinstance(penalty, Lasso):
        return np.ones(data.p), beta_ls
    if isinstance(penalty, GroupLasso):
        return np.array(penalty.weights), beta_ls
    if beta_ls is None:
        beta_ls = fit_ols(data)
    if isinstance(penalty, AdaptiveLasso):
        return adaptive_lasso_weights(penalty.scheme, beta_ls), beta_ls
    if isinstance(penalty, AdaptiveGroupLasso):
        return adaptive_group_weights(penalty.scheme, beta_ls, penalty.groups), beta_ls
    raise TypeError(f"unknown penalty {penalty!r}")


def null_gamma(data: Dataset, penalty: PenaltySpec, w: NDArray) -> float:
    groups = getattr(penalty, "groups", None)
    if groups is None:
        return null_gamma_lasso(data, w)
    return null_gamma_group(data, groups, w)


def fit_penalty(data: Dataset, penalty: PenaltySpec, gamma: float,
                config: SolverConfig = DEFAULT_CONFIG,
                beta0: ArrayLike | None = None,
                weights: NDArray | None = None,
                beta_ls: NDArray | None = None,
                workspace: GroupWorkspace | None = None) -> FitResult:
    """Fit any supported penalty at one gamma."""
    if weights is None:
        weights, beta_ls = penalty_weights(data, penalty, beta_ls)
    groups = getattr(penalty, "groups", None)
    if groups is None:
        return fit_weighted_lasso(data, weights, gamma, config, beta0, beta_ls)
    return fit_group_lasso(data, groups, weights, gamma, config, beta0, beta_ls,
                           workspace)


def gamma_grid(gamma_max: float, size: int = 100, decades: float = 4.0) -> NDArray:
    """Strictly decreasing log-spaced grid starting at ``gamma_max``."""
    if size == 1:
        return np.array([float(gamma_max)])
    return gamma_max * 10.0 ** (-decades * np.arange(size) / (size - 1))


def compute_path(data: Dataset, penalty: PenaltySpec,
                 config: SolverConfig = DEFAULT_CONFIG,
                 gammas: ArrayLike | None = None,
                 compute_dof: bool = True,
                 design: str = "auto") -> PathResult:
    """Fit ``penalty`` along a decreasing gamma grid with warm starts.

    Failures at individual grid points are recorded in ``failures`` and the
    corresponding entries of ``fits``/``dofs`` are ``None``.
    """
    weights, beta_ls = penalty_weights(data, penalty)
    if gammas is None:
        gammas = gamma_grid(null_gamma(data, penalty, weights),
                            config.grid_size, config.grid_decades)
    gammas = np.asarray(gammas, dtype=float)
    if gammas.ndim != 1 or np.any(np.diff(gammas) >= 0) or np.any(gammas <= 0):
        raise ValueError("gamma grid must be positive and strictly decreasing")
    groups = getattr(penalty, "groups", None)
    workspace = GroupWorkspace(data, groups) if groups is not None else None
    fits: list = []
    failures: dict = {}
    beta = None
    for i, gam in enumerate(gammas):
        try:
            fit = fit_penalty(data, penalty, gam, config, beta, weights, beta_ls,
                              workspace)
        except LassoDfError as exc:
            failures[i] = f"{type(exc).__name__}: {exc}"
            fits.append(None)
            continue
        if not fit.converged:
            failures[i] = f"unconverged (KKT {fit.kkt_residual:.3g})"
        fits.append(fit)
        beta = fit.beta
    path = PathResult(gammas, fits, [None] * len(fits), [], penalty, weights,
                      beta_ls, failures=failures)
    path.transitions = detect_transitions(path)
    if compute_dof:
        from ..dof import df_for_fit
        near = near_transition_flags(gammas, path.transitions)
        for i, fit in enumerate(fits):
            if fit is None:
                continue
            try:
                path.dofs[i] = df_for_fit(fit, data, penalty, design=design,
                                          near_transition=bool(near[i]))
            except LassoDfError as exc:
                failures[i] = f"{type(exc).__name__}: {exc}"
    return path


def detect_transitions(path: PathResult) -> list[float]:
    """Midpoints of consecutive grid values whose active sets differ."""
    out = []
    for i in range(len(path.gammas) - 1):
        a, b = path.fits[i], path.fits[i + 1]
        if a is None or b is None:
            continue
        if not a.active.same_as(b.active):
            out.append(0.5 * (path.gammas[i] + path.gammas[i + 1]))
    return out


def near_transition_flags(gammas: ArrayLike, transitions: list[float],
                          band: float = TRANSITION_BAND) -> NDArray:
    g = np.asarray(gammas, dtype=float)
    if not transitions:
        return np.zeros(g.size, dtype=bool)
    t = np.asarray(transitions)
    return np.min(np.abs(g[:, None] - t[None, :]), axis=1) <= band
