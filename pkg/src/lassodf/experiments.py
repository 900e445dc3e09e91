"""Simulation studies and the grouped-dummy data pipeline."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .dof import df_for_fit
from .errors import ConfigError, DegenerateQuantiles, NumericalError
from .model import (AdaptiveGroupLasso, AdaptiveLasso, Dataset, GroupInverseNorm,
                    GroupLasso, GroupStructure, InversePower, Lasso, PenaltySpec,
                    standardize)
from .oracle import (DEFAULT_SEED, check_failures, covariance_terms,
                     replicate_rng)
from .parallel import ordered_map
from .selection import (ACTIVE_SET, ANALYTIC, attach_criteria, estimate_sigma2,
                        loo_cv, select_index)
from .solvers import (DEFAULT_CONFIG, GroupWorkspace, SolverConfig, compute_path,
                      fit_ols, fit_penalty, null_gamma, penalty_weights)

log = logging.getLogger(__name__)

DEFAULT_BETA = (5.0, -5.0, 5.0, 3.0, -3.0, 3.0, 1.0, -1.0, 1.0)
BUCKETS = ("<=7", "8", "9", "10", "11", "12", ">=13")
METHODS = ("adaptive", "group", "adaptive-group")
# "variance": snr = var(X beta) / sigma^2; "sd": snr = sd(X beta) / sigma
SNR_DEFINITIONS = ("variance", "sd")


def default_beta(p: int) -> NDArray:
    b = np.zeros(p)
    k = min(p, len(DEFAULT_BETA))
    b[:k] = DEFAULT_BETA[:k]
    return b


@dataclass(frozen=True, eq=False)
class SyntheticSpec:
    """Fixed Gaussian design plus replicated Gaussian noise at a target SNR."""

    n: int = 100
    p: int = 30
    beta: Optional[NDArray] = None
    snr: float = 4.0
    B: int = 500
    group_size: int = 3
    seed: int = DEFAULT_SEED
    snr_definition: str = "variance"

    def __post_init__(self):
        if self.snr_definition not in SNR_DEFINITIONS:
            raise ConfigError(f"snr_definition must be one of {SNR_DEFINITIONS}")
        b = default_beta(self.p) if self.beta is None else np.asarray(self.beta, float)
        if b.shape != (self.p,):
            raise ConfigError(f"beta must have length p={self.p}")
        if not self.snr > 0:
            raise ConfigError("snr must be positive")
        if self.p % self.group_size:
            raise ConfigError("p must be a multiple of group_size")
        object.__setattr__(self, "beta", b)

    @property
    def groups(self) -> GroupStructure:
        return GroupStructure.contiguous([self.group_size] * (self.p // self.group_size))

    def design(self) -> tuple[NDArray, NDArray, float]:
        """``(X, X beta, sigma^2)``; X depends only on the seed."""
        X = replicate_rng(self.seed, 0).standard_normal((self.n, self.p))
        mu = X @ self.beta
        ratio = self.snr if self.snr_definition == "variance" else self.snr ** 2
        return X, mu, float(np.var(mu)) / ratio

    def as_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "beta": self.beta.tolist(),
                "snr": self.snr, "B": self.B, "group_size": self.group_size,
                "seed": self.seed, "snr_definition": self.snr_definition,
                "sigma2": self.design()[2]}


def gen_synthetic(spec: SyntheticSpec, replicate_index: int) -> Dataset:
    """Replicate ``b`` of the study: same design, noise stream ``(seed, b + 1)``."""
    X, mu, sigma2 = spec.design()
    eps = np.sqrt(sigma2) * replicate_rng(spec.seed, replicate_index + 1).standard_normal(spec.n)
    return Dataset(X, mu + eps)


def method_penalty(method: str, groups: GroupStructure | None = None,
                   scheme=None) -> PenaltySpec:
    """Penalty for a method name; ``scheme`` overrides the default weights."""
    if method == "lasso":
        return Lasso()
    if method == "adaptive":
        return AdaptiveLasso(InversePower(1.0) if scheme is None else scheme)
    if groups is None:
        raise ConfigError(f"method {method!r} needs a group structure")
    if method == "group":
        return GroupLasso(groups)
    if method == "adaptive-group":
        return AdaptiveGroupLasso(groups, GroupInverseNorm() if scheme is None else scheme)
    raise ConfigError(f"unknown method {method!r}")


# ---------------------------------------------------------------- unbiasedness

@dataclass(frozen=True)
class UnbiasednessRow:
    gamma: float
    mean_df: float
    se_df: float
    cov_df: float
    se_cov: float
    se_diff: float
    replicates: int

    @property
    def z(self) -> float:
        return (self.mean_df - self.cov_df) / self.se_diff if self.se_diff > 0 else 0.0


def default_gamma_fractions(k: int = 5) -> NDArray:
    return np.geomspace(0.5, 0.03, k)


def unbiasedness_gammas(spec: SyntheticSpec, method: str,
                        fractions: ArrayLike | None = None) -> NDArray:
    """Gammas as fractions of the null threshold of replicate 0.

    A noisy replicate is used because adaptive weights are undefined at the
    noiseless response whenever some true coefficients are zero.
    """
    fractions = default_gamma_fractions() if fractions is None else np.asarray(fractions)
    fractions = np.sort(np.asarray(fractions, float))[::-1]
    if method == "ols":
        return fractions
    data = gen_synthetic(spec, 0)
    pen = method_penalty(method, spec.groups)
    w, _ = penalty_weights(data, pen)
    return null_gamma(data, pen, w) * fractions


def _unbiased_replicate(b: int, spec: SyntheticSpec, method: str, gammas: NDArray,
                        config: SolverConfig):
    data = gen_synthetic(spec, b)
    k = gammas.size
    yhat = np.empty((k, spec.n))
    dfs = np.empty(k)
    try:
        if method == "ols":
            fitted = data.X @ fit_ols(data)
            yhat[:] = fitted
            dfs[:] = spec.p
            return data.y, yhat, dfs
        pen = method_penalty(method, spec.groups)
        w, bls = penalty_weights(data, pen)
        groups = getattr(pen, "groups", None)
        ws = GroupWorkspace(data, groups) if groups is not None else None
        beta = None
        for i, gam in enumerate(gammas):
            fit = fit_penalty(data, pen, gam, config, beta, w, bls, ws)
            if not fit.converged:
                return None
            beta = fit.beta
            yhat[i] = data.X @ fit.beta
            dfs[i] = df_for_fit(fit, data, pen).value
    except NumericalError as exc:
        log.debug("replicate %d failed: %s", b, exc)
        return None
    return data.y, yhat, dfs


def run_unbiasedness(spec: SyntheticSpec, gamma_grid: ArrayLike, method: str,
                     config: SolverConfig = DEFAULT_CONFIG,
                     jobs: int = 1) -> list[UnbiasednessRow]:
    """Replicate-mean analytic df against the covariance df at each gamma.

    All gammas share the noise of each replicate.  ``se_diff`` is the
    standard error of the paired difference between the two estimates.
    """
    gammas = np.sort(np.asarray(gamma_grid, dtype=float))[::-1]
    work = partial(_unbiased_replicate, spec=spec, method=method, gammas=gammas,
                   config=config)
    results = ordered_map(work, range(spec.B), jobs)
    ok = [r for r in results if r is not None]
    check_failures(spec.B - len(ok), spec.B)
    Y = np.array([r[0] for r in ok])
    H = np.array([r[1] for r in ok])      # (B, k, n)
    D = np.array([r[2] for r in ok])      # (B, k)
    _, _, sigma2 = spec.design()
    B = len(ok)
    rows = []
    for i, gam in enumerate(gammas):
        t = covariance_terms(Y, H[:, i, :], sigma2) * B / (B - 1)
        d = D[:, i]
        diff = t - d
        rows.append(UnbiasednessRow(
            float(gam), float(d.mean()), float(d.std(ddof=1) / np.sqrt(B)),
            float(t.mean()), float(t.std(ddof=1) / np.sqrt(B)),
            float(diff.std(ddof=1) / np.sqrt(B)), B))
    return rows


# -------------------------------------------------------------------- table 1

@dataclass(eq=False)
class SelectionHistogram:
    method: str
    sizes: list = field(default_factory=list)
    failures: int = 0

    @staticmethod
    def bucket(k: int) -> str:
        if k <= 7:
            return "<=7"
        if k >= 13:
            return ">=13"
        return str(k)

    @property
    def counts(self) -> dict:
        out = {b: 0 for b in BUCKETS}
        for k in self.sizes:
            out[self.bucket(k)] += 1
        return out

    def fraction(self, k: int) -> float:
        return float(np.mean(np.asarray(self.sizes) == k)) if self.sizes else 0.0

    def mode(self) -> str:
        c = self.counts
        return max(BUCKETS, key=lambda b: c[b])


def _table1_replicate(b: int, spec: SyntheticSpec, config: SolverConfig,
                      methods: tuple) -> dict:
    data = gen_synthetic(spec, b)
    out = {}
    try:
        sigma2 = estimate_sigma2(data)
    except NumericalError:
        return {m: None for m in methods}
    for m in methods:
        try:
            path = compute_path(data, method_penalty(m, spec.groups), config)
            attach_criteria(path, data, sigma2)
            idx = select_index(path, "bic", ANALYTIC)
            out[m] = path.fits[idx].active.size
        except NumericalError as exc:
            log.debug("table1 replicate %d, %s failed: %s", b, m, exc)
            out[m] = None
    return out


def run_table1(spec: SyntheticSpec, B: int | None = None,
               config: SolverConfig = DEFAULT_CONFIG, jobs: int = 1,
               methods: tuple = METHODS) -> dict[str, SelectionHistogram]:
    """Distribution of the BIC-selected model size over replicates."""
    B = spec.B if B is None else B
    work = partial(_table1_replicate, spec=spec, config=config, methods=methods)
    results = ordered_map(work, range(B), jobs)
    hists = {m: SelectionHistogram(m) for m in methods}
    for r in results:
        for m in methods:
            if r[m] is None:
                hists[m].failures += 1
            else:
                hists[m].sizes.append(int(r[m]))
    for h in hists.values():
        check_failures(h.failures, B)
    return hists


# ------------------------------------------------------------ data pipeline

def discretize_encode(data: Dataset, levels: int = 4) -> tuple[Dataset, GroupStructure]:
    """Equal-frequency binning of every column, then reference-cell dummies.

    Cut points are the interior quantiles (linear interpolation, so ties
    between order statistics fall at midpoints); a value equal to a cut goes
    to the upper bin.  The lowest bin is the reference, leaving
    ``levels - 1`` dummies per column, grouped by source column.
    """
    if levels < 2:
        raise ConfigError("levels must be at least 2")
    X = np.asarray(data.X)
    n, p = X.shape
    probs = np.arange(1, levels) / levels
    cols, assign = [], []
    for j in range(p):
        x = X[:, j]
        distinct = np.unique(x).size
        if distinct < levels:
            raise DegenerateQuantiles(j, distinct, levels)
        edges = np.quantile(x, probs)
        bins = np.searchsorted(edges, x, side="right")
        if np.unique(bins).size < levels:
            raise DegenerateQuantiles(j, int(np.unique(bins).size), levels)
        for lev in range(1, levels):
            cols.append((bins == lev).astype(float))
            assign.append(j)
    return Dataset(np.column_stack(cols), data.y), GroupStructure(np.array(assign))


DIABETES_LIKE_BETA = (-0.1, -1.5, 3.3, 2.0, -4.4, 2.7, 0.5, 1.0, 4.5, 0.3)


def diabetes_like(seed: int, n: int = 442, p: int = 10, snr: float = 1.0) -> Dataset:
    """Ten correlated covariates with a mix of strong and weak effects.

    Coefficient magnitudes follow the pattern of a standardized clinical
    regression (two dominant, several moderate, a few near zero); columns 4
    and 5 are strongly correlated, the rest have AR(1) correlation 0.3.
    ``snr`` is Var(X beta) / sigma^2.
    """
    rng = replicate_rng(seed, 0)
    idx = np.arange(p)
    corr = 0.3 ** np.abs(np.subtract.outer(idx, idx))
    if p >= 6:
        corr[4, 5] = corr[5, 4] = 0.9
    X = rng.standard_normal((n, p)) @ np.linalg.cholesky(corr).T
    beta = np.resize(np.asarray(DIABETES_LIKE_BETA), p)
    mu = X @ beta
    sigma = np.sqrt(np.var(mu) / snr)
    return Dataset(X, mu + sigma * rng.standard_normal(n))


@dataclass(eq=False)
class PipelineReport:
    penalty: str
    grouped: bool
    gammas: NDArray
    betas: NDArray
    df_analytic: NDArray
    df_active_set: NDArray
    df_active_groups: NDArray
    selections: dict
    sigma2: float
    column_names: list
    cv_error: Optional[NDArray] = None

    def df_curve_rows(self):
        for i, g in enumerate(self.gammas):
            yield (g, float(np.log(g)), self.df_analytic[i], self.df_active_set[i],
                   self.df_active_groups[i])


DF_CURVE_HEADER = ("gamma", "log_gamma", "df_analytic", "df_active_set",
                   "df_active_groups")


def run_dataset_pipeline(data: Dataset, penalty_kind: str, grouped: bool = False,
                         config: SolverConfig = DEFAULT_CONFIG, cv: bool = True,
                         groups: GroupStructure | None = None,
                         column_names: list | None = None,
                         levels: int = 4, criterion: str = "bic",
                         scheme=None) -> PipelineReport:
    """Standardize, optionally encode, fit the path and select gamma three ways.

    Selections: the criterion with the analytic df, the criterion with the
    active-set size, and (if ``cv``) leave-one-out cross-validation over the
    same grid.  ``scheme`` may be a callable ``(p, groups) -> scheme`` when
    it depends on the encoded design.
    """
    names = list(column_names) if column_names else [f"x{j + 1}" for j in range(data.p)]
    if grouped:
        data, groups = discretize_encode(data, levels)
        names = [f"{names[j]}_L{lev}" for j in range(len(names))
                 for lev in range(1, levels)]
    if penalty_kind in ("group", "adaptive-group") and groups is None:
        raise ConfigError(f"penalty {penalty_kind!r} needs groups (use grouped "
                          "encoding or a group file)")
    if callable(scheme):
        scheme = scheme(data.p, groups)
    std = standardize(data)
    sigma2 = estimate_sigma2(std)
    pen = method_penalty(penalty_kind, groups, scheme)
    path = compute_path(std, pen, config)
    attach_criteria(path, std, sigma2)
    k = len(path.gammas)
    df_a = path.df_values()
    df_s = np.array([np.nan if f is None else f.active.size for f in path.fits])
    if groups is None:
        df_g = df_s.copy()
    else:
        df_g = np.array([np.nan if f is None else f.active.n_groups for f in path.fits])
    sel = {}
    for source, label in ((ANALYTIC, f"{criterion}_analytic"),
                          (ACTIVE_SET, f"{criterion}_naive")):
        i = select_index(path, criterion, source)
        sel[label] = {"gamma": float(path.gammas[i]), "index": i,
                      "active_set": int(path.fits[i].active.size)}
    cv_err = None
    if cv:
        loo = loo_cv(std, pen, path.gammas, config)
        cv_err = loo.cv_error
        sel["cv"] = {"gamma": loo.gamma, "index": loo.index,
                     "active_set": int(path.fits[loo.index].active.size)}
    betas = np.vstack([np.full(std.p, np.nan) if f is None else f.beta
                       for f in path.fits])
    return PipelineReport(penalty_kind, grouped, path.gammas, betas, df_a, df_s,
                          df_g, sel, sigma2, names, cv_err)
