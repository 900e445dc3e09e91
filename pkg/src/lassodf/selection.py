"""Information criteria, noise-variance estimation and gamma selection."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InsufficientDof
from .model import Dataset, FitResult, PathResult, PenaltySpec
from .solvers import DEFAULT_CONFIG, SolverConfig, compute_path, fit_ols

ANALYTIC = "analytic"
ACTIVE_SET = "active_set"
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class CriterionValue:
    gamma: float
    aic: float
    bic: float
    rss: float
    df_used: float
    df_source: str


def estimate_sigma2(data: Dataset) -> float:
    """Residual variance of the OLS fit, RSS / (n - p)."""
    if data.n <= data.p:
        raise InsufficientDof(f"n={data.n} must exceed p={data.p}")
    resid = data.y - data.X @ fit_ols(data)
    return float(resid @ resid) / (data.n - data.p)


def criteria(fit: FitResult, df: float, sigma2: float, data: Dataset,
             df_source: str = ANALYTIC) -> CriterionValue:
    """AIC = RSS/(n s2) + 2 df/n and BIC = RSS/(n s2) + log(n) df/n."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    resid = data.y - data.X @ fit.beta
    rss = float(resid @ resid)
    n = data.n
    fit_term = rss / (n * sigma2)
    return CriterionValue(fit.gamma, fit_term + 2.0 * df / n,
                          fit_term + np.log(n) * df / n, rss, float(df), df_source)


def naive_df(fit: FitResult) -> float:
    return float(fit.active.size)


def attach_criteria(path: PathResult, data: Dataset, sigma2: float) -> PathResult:
    """Fill ``path.criteria`` for both the analytic and the active-set-size df."""
    for source in (ANALYTIC, ACTIVE_SET):
        vals = []
        for fit, dof in zip(path.fits, path.dofs):
            if fit is None or (source == ANALYTIC and dof is None):
                vals.append(None)
                continue
            df = dof.value if source == ANALYTIC else naive_df(fit)
            vals.append(criteria(fit, df, sigma2, data, source))
        path.criteria[source] = vals
    return path


def argmin_prefer_first(values: ArrayLike) -> int:
    """Index of the minimum; near-ties go to the earliest index.

    Grids are stored in decreasing gamma, so the earliest index is the
    largest gamma.  NaN entries are ignored.
    """
    v = np.asarray(values, dtype=float)
    ok = np.isfinite(v)
    if not ok.any():
        raise ValueError("no finite criterion values")
    best = np.min(v[ok])
    tol = TIE_RTOL * max(1.0, abs(best))
    return int(np.flatnonzero(ok & (v <= best + tol))[0])


def select_index(path: PathResult, criterion: str = "bic",
                 df_source: str = ANALYTIC) -> int:
    if df_source not in path.criteria:
        raise ValueError(f"criteria for {df_source!r} not attached to the path")
    crit = criterion.lower()
    if crit not in ("aic", "bic"):
        raise ValueError(f"unknown criterion {criterion!r}")
    vals = [np.nan if c is None else getattr(c, crit)
            for c in path.criteria[df_source]]
    return argmin_prefer_first(vals)


def select_gamma(path: PathResult, criterion: str = "bic",
                 df_source: str = ANALYTIC) -> float:
    """Grid gamma minimizing the criterion; ties go to the larger gamma."""
    return float(path.gammas[select_index(path, criterion, df_source)])


@dataclass(frozen=True, eq=False)
class LooResult:
    gamma: float
    index: int
    cv_error: NDArray
    fold_hashes: tuple


def _rows_hash(rows: NDArray) -> str:
    return hashlib.sha1(np.ascontiguousarray(rows, dtype=np.int64).tobytes()).hexdigest()[:16]


def loo_cv(data: Dataset, penalty: PenaltySpec, grid: ArrayLike,
           config: SolverConfig = DEFAULT_CONFIG) -> LooResult:
    """Leave-one-out prediction error over a fixed gamma grid.

    Each fold refits everything on its n-1 rows, adaptive weights included.
    ``fold_hashes`` fingerprints the training rows used by each fold.
    """
    grid = np.asarray(grid, dtype=float)
    n = data.n
    errors = np.zeros(grid.size)
    hashes = []
    for i in range(n):
        rows = np.delete(np.arange(n), i)
        hashes.append(_rows_hash(rows))
        fold = data.subset(rows)
        path = compute_path(fold, penalty, config, gammas=grid, compute_dof=False)
        x_i = data.X[i]
        for k, fit in enumerate(path.fits):
            if fit is None:
                errors[k] = np.nan
                continue
            errors[k] += (data.y[i] - x_i @ fit.beta) ** 2
    errors /= n
    idx = argmin_prefer_first(errors)
    return LooResult(float(grid[idx]), idx, errors, tuple(hashes))
