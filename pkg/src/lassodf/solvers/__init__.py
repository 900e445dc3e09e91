"""Penalized least-squares solvers and solution paths."""
from .config import DEFAULT_CONFIG, FitLog, SolverConfig, record_fits
from .group import (GroupWorkspace, adaptive_group_weights,
                    fit_adaptive_group_lasso, fit_group_lasso, group_kkt,
                    null_gamma_group)
from .lasso import (adaptive_lasso_weights, fit_adaptive_lasso, fit_ols,
                    fit_weighted_lasso, lasso_kkt, null_gamma_lasso,
                    soft_threshold)
from .path import (compute_path, detect_transitions, fit_penalty, gamma_grid,
                   near_transition_flags, null_gamma, penalty_weights)

__all__ = [
    "DEFAULT_CONFIG", "FitLog", "SolverConfig", "record_fits",
    "GroupWorkspace", "adaptive_group_weights", "fit_adaptive_group_lasso",
    "fit_group_lasso", "group_kkt", "null_gamma_group",
    "adaptive_lasso_weights", "fit_adaptive_lasso", "fit_ols",
    "fit_weighted_lasso", "lasso_kkt", "null_gamma_lasso", "soft_threshold",
    "compute_path", "detect_transitions", "fit_penalty", "gamma_grid",
    "near_transition_flags", "null_gamma", "penalty_weights",
]
