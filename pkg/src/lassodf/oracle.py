"""Model-free degrees-of-freedom references.

Two routes, both independent of the analytic formulas: the covariance
definition ``sum_i Cov(y_i, yhat_i) / sigma^2`` estimated by Monte Carlo, and
the divergence ``sum_i d yhat_i / d y_i`` estimated by central differences.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DiscontinuityDetected, FitterFailure, LassoDfError

log = logging.getLogger(__name__)

DEFAULT_SEED = 20240607
MAX_FAILURE_RATE = 0.01

Fitter = Callable[[NDArray], NDArray]


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for replicate ``index``; no state shared across replicates."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def gaussian_sampler(seed: int, n: int, sigma: float, index: int = 0) -> NDArray:
    """Reproducible draw of N(0, sigma^2 I_n) from stream ``(seed, index)``."""
    return sigma * replicate_rng(seed, index).standard_normal(n)


@dataclass(frozen=True, eq=False)
class McConfig:
    X: NDArray
    true_beta: NDArray
    sigma: float
    B: int = 1000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.B < 2:
            raise ValueError("need at least two replicates")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def mu(self) -> NDArray:
        return np.asarray(self.X) @ np.asarray(self.true_beta)


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    std_error: float
    B: int
    failures: int = 0


def covariance_terms(Y: NDArray, Yhat: NDArray, sigma2: float) -> NDArray:
    """Per-replicate contributions whose sum over B-1 is the covariance df."""
    Yc = Y - Y.mean(axis=0)
    Hc = Yhat - Yhat.mean(axis=0)
    return np.einsum("bi,bi->b", Yc, Hc) / sigma2


def covariance_df(Y: ArrayLike, Yhat: ArrayLike, sigma2: float) -> OracleEstimate:
    """Sample-covariance df from stacked replicates (rows are replicates)."""
    Y = np.asarray(Y, dtype=float)
    Yhat = np.asarray(Yhat, dtype=float)
    B = Y.shape[0]
    t = covariance_terms(Y, Yhat, sigma2)
    value = float(t.sum() / (B - 1))
    se = float(t.std(ddof=1) * np.sqrt(B) / (B - 1))
    return OracleEstimate(value, se, B)


def check_failures(failures: int, B: int) -> None:
    if failures > MAX_FAILURE_RATE * B:
        raise FitterFailure(-1, RuntimeError(
            f"{failures} of {B} replicates failed, above the 1% limit"))


def df_covariance_mc(config: McConfig, fitter: Fitter) -> OracleEstimate:
    """Monte Carlo estimate of ``sum_i Cov(y_i, yhat_i) / sigma^2``.

    Replicate ``b`` uses noise stream ``(seed, b)``.  Failed replicates are
    skipped and counted; more than 1% failures aborts.
    """
    mu = config.mu
    n = mu.size
    Y, H = [], []
    failures = 0
    for b in range(config.B):
        y = mu + gaussian_sampler(config.seed, n, config.sigma, b)
        try:
            yhat = np.asarray(fitter(y), dtype=float)
        except LassoDfError as exc:
            failures += 1
            log.debug("replicate %d failed: %s", b, exc)
            continue
        Y.append(y)
        H.append(yhat)
    check_failures(failures, config.B)
    est = covariance_df(np.array(Y), np.array(H), config.sigma ** 2)
    return OracleEstimate(est.value, est.std_error, est.B, failures)


def _central_divergence(fitter: Fitter, y: NDArray, base: NDArray, h: float,
                        jump: float) -> float:
    total = 0.0
    for i in range(y.size):
        yp = y.copy()
        ym = y.copy()
        yp[i] += h
        ym[i] -= h
        fp = float(np.asarray(fitter(yp))[i])
        fm = float(np.asarray(fitter(ym))[i])
        fwd = (fp - base[i]) / h
        bwd = (base[i] - fm) / h
        if abs(fwd - bwd) > jump:
            raise DiscontinuityDetected(i, abs(fwd - bwd))
        total += (fp - fm) / (2.0 * h)
    return total


def df_divergence_fd(fitter: Fitter, y: ArrayLike, h: float | None = None,
                     richardson: bool = True, jump: float = 0.5) -> float:
    """Divergence of the fit map at ``y`` by central differences.

    With ``richardson=True`` the estimate is repeated at h/2; if the two
    differ by more than 1e-3 (relative) the extrapolation
    ``(4 D(h/2) - D(h)) / 3`` is returned instead of D(h/2).
    """
    y = np.asarray(y, dtype=float)
    if h is None:
        h = 1e-5 * (1.0 + float(np.max(np.abs(y))))
    base = np.asarray(fitter(y), dtype=float)
    d_h = _central_divergence(fitter, y, base, h, jump)
    if not richardson:
        return d_h
    d_half = _central_divergence(fitter, y, base, 0.5 * h, jump)
    if abs(d_h - d_half) > 1e-3 * max(1.0, abs(d_half)):
        return (4.0 * d_half - d_h) / 3.0
    return d_half
