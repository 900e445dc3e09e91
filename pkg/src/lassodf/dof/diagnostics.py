"""How the group-lasso df moves with gamma.

The derivative of the fit, of the curvature matrix Pi, and the spectrum of
``Pi + gamma dPi/dgamma`` (a rank-two perturbation of a multiple of the
identity per group) decide whether df is monotone in gamma.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import NegativeDiscriminant, NotPositiveDefinite, Singular
from ..model import Dataset, FitResult, GroupStructure
from ..numkit import cholesky_solve, sym_eig
from .blocks import BlockDiagonal, build_pi

PSD = "PSD"
INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class GroupSpectrum:
    lam1: float
    lam2: float
    lam3: float
    delta: float
    rho: float
    multiplicity: int


@dataclass(eq=False)
class DiagnosticsReport:
    columns: NDArray
    dbeta_dgamma: NDArray
    pi: BlockDiagonal
    dpi_dgamma: BlockDiagonal
    spectrum: dict = field(default_factory=dict)
    definiteness: str = PSD
    sufficient_trace: float = float("nan")
    df_slope: float = float("nan")


def _solve_spd(M: NDArray, rhs: NDArray) -> NDArray:
    try:
        return cholesky_solve(0.5 * (M + M.T), rhs)
    except NotPositiveDefinite as exc:
        raise Singular(str(exc)) from None


def _system(fit: FitResult, groups: GroupStructure, w: NDArray, gamma: float,
            data: Dataset):
    pi = build_pi(fit, groups, w)
    cols = pi.columns
    G = data.gram[np.ix_(cols, cols)]
    return pi, cols, G, G + gamma * pi.dense()


def _scaled_beta(fit, pi: BlockDiagonal, w) -> NDArray:
    # w_g b_g / r_g on each active block
    out = np.zeros(pi.size)
    for g, pos in zip(pi.groups, pi.positions):
        b = fit.beta[pi.columns[pos]]
        out[pos] = w[g] * b / np.linalg.norm(b)
    return out


def diag_dbeta_dgamma(fit: FitResult, groups: GroupStructure, w: NDArray,
                      gamma: float, data: Dataset) -> NDArray:
    """Derivative of the active coefficients in gamma (implicit differentiation)."""
    pi, cols, G, H = _system(fit, groups, w, gamma, data)
    if cols.size == 0:
        return np.zeros(0)
    return -_solve_spd(H, _scaled_beta(fit, pi, w))


def _dpi_blocks(fit, pi: BlockDiagonal, w, v: NDArray):
    """Per-block dPi/dgamma given v = -dbeta/dgamma."""
    blocks = []
    for g, pos in zip(pi.groups, pi.positions):
        u = fit.beta[pi.columns[pos]]
        if u.size == 1:
            blocks.append(np.zeros((1, 1)))
            continue
        vg = v[pos]
        r = float(np.linalg.norm(u))
        uv = float(u @ vg)
        blk = w[g] * (uv / r ** 3 * np.eye(u.size)
                      - 3.0 * uv / r ** 5 * np.outer(u, u)
                      + (np.outer(u, vg) + np.outer(vg, u)) / r ** 3)
        blocks.append(blk)
    return tuple(blocks)


def diag_dpi_dgamma(fit: FitResult, groups: GroupStructure, w: NDArray,
                    gamma: float, data: Dataset) -> BlockDiagonal:
    pi, cols, G, H = _system(fit, groups, w, gamma, data)
    if cols.size == 0:
        return pi
    v = _solve_spd(H, _scaled_beta(fit, pi, w))
    return BlockDiagonal(pi.groups, pi.columns, pi.positions,
                         _dpi_blocks(fit, pi, w, v))


def _dense_rank_two(a, b, c, u, v):
    n = u.size
    M = a * np.eye(n) + b * np.outer(u, u) + c * (np.outer(u, v) + np.outer(v, u))
    vals = np.sort(np.linalg.eigvalsh(M))
    # drop the n-2 eigenvalues closest to a, keep the two carried by span{u, v}
    keep = np.sort(np.argsort(np.abs(vals - a), kind="stable")[n - 2:])
    l3, l1 = vals[keep[0]], vals[keep[-1]]
    return float(l1), float(a), float(l3), float((l1 - l3) ** 2)


def spectrum_rank_two(a: float, b: float, c: float, u: ArrayLike,
                      v: ArrayLike) -> tuple[float, float, float, float]:
    """Eigenvalues of ``a I + b u u^T + c (u v^T + v u^T)``.

    Returns ``(lam1, lam2, lam3, delta)``: ``lam2 = a`` has multiplicity n-2
    and ``lam1 >= lam3`` solve the 2 x 2 problem on span{u, v}, with
    discriminant ``delta``.  Degenerate inputs (b or c zero, u parallel to v)
    go to a dense eigensolver.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.size < 2:
        raise ValueError("need dimension at least 2")
    uu = float(u @ u)
    vv = float(v @ v)
    uv = float(u @ v)
    parallel = uu == 0 or vv == 0 or abs(uv) >= (1 - 1e-12) * np.sqrt(uu * vv)
    if b == 0 or c == 0 or parallel:
        return _dense_rank_two(a, b, c, u, v)
    delta = 4 * c * c * uu * vv + b * b * uu * uu + 4 * b * c * uu * uv
    scale = 4 * c * c * uu * vv + b * b * uu * uu + 4 * abs(b * c) * uu * abs(uv)
    if delta < -1e-12 * max(1.0, scale):
        raise NegativeDiscriminant(f"discriminant {delta:.3g} is negative")
    root = np.sqrt(max(delta, 0.0))
    s = 2 * a + b * uu + 2 * c * uv
    return 0.5 * (s + root), float(a), 0.5 * (s - root), float(delta)


def rank_two_coefficients(gamma: float, w: float, u: NDArray, v: NDArray):
    """(a, b, c) with Pi_g + gamma dPi_g/dgamma = a I + b uu^T + c (uv^T + vu^T)."""
    r = float(np.linalg.norm(u))
    uv = float(u @ v)
    a = w / r + gamma * w * uv / r ** 3
    b = -(w / r ** 3 + 3 * gamma * w * uv / r ** 5)
    c = gamma * w / r ** 3
    return a, b, c


def classify_definiteness(spectrum: dict, tol: float = 1e-10) -> str:
    """PSD unless some group has eigenvalues of opposite sign.

    The product tolerance is scaled by max(1, lam1^2) so that roundoff in
    large blocks is not mistaken for indefiniteness.
    """
    for s in spectrum.values():
        prod = s.lam1 * s.lam3
        thr = tol * max(1.0, s.lam1 ** 2)
        if prod < -thr:
            return INDEFINITE
        if s.multiplicity > 0 and s.lam2 < -thr:
            return INDEFINITE
        if prod > thr and s.lam3 < 0:
            return INDEFINITE
    return PSD


def diagnostics(fit: FitResult, groups: GroupStructure, w: NDArray, gamma: float,
                data: Dataset) -> DiagnosticsReport:
    """Derivatives, per-group spectra and the df slope at one fit."""
    pi, cols, G, H = _system(fit, groups, w, gamma, data)
    if cols.size == 0:
        empty = BlockDiagonal(pi.groups, cols, (), ())
        return DiagnosticsReport(cols, np.zeros(0), pi, empty, {}, PSD, 0.0, 0.0)
    v = _solve_spd(H, _scaled_beta(fit, pi, w))
    dpi = BlockDiagonal(pi.groups, pi.columns, pi.positions,
                        _dpi_blocks(fit, pi, w, v))
    spectrum = {}
    for g, pos in zip(pi.groups, pi.positions):
        if pos.size < 2:
            continue
        u = fit.beta[cols[pos]]
        vg = v[pos]
        a, b, c = rank_two_coefficients(gamma, float(w[g]), u, vg)
        l1, l2, l3, delta = spectrum_rank_two(a, b, c, u, vg)
        nv = np.linalg.norm(vg)
        rho = float(u @ vg / (np.linalg.norm(u) * nv)) if nv > 0 else 1.0
        spectrum[int(g)] = GroupSpectrum(l1, l2, l3, delta, rho, pos.size - 2)
    report = DiagnosticsReport(cols, -v, pi, dpi, spectrum,
                               classify_definiteness(spectrum))
    report.sufficient_trace, report.df_slope = monotonicity_sufficient(
        report, data, fit, gamma)
    return report


def df_slope(report: DiagnosticsReport, data: Dataset, gamma: float) -> float:
    """d df/d gamma = -trace[K (Pi + gamma dPi) K G] with K = (G + gamma Pi)^{-1}."""
    cols = report.columns
    if cols.size == 0:
        return 0.0
    G = data.gram[np.ix_(cols, cols)]
    H = G + gamma * report.pi.dense()
    D = report.pi.dense() + gamma * report.dpi_dgamma.dense()
    KG = _solve_spd(H, G)
    KD = _solve_spd(H, D)
    return -float(np.trace(KD @ KG))


def monotonicity_sufficient(report: DiagnosticsReport, data: Dataset,
                            fit: FitResult, gamma: float) -> tuple[float, float]:
    """The trace condition in n x n operator form, and the df slope.

    ``trace[(Pi + gamma dPi) M^T S A S M]`` with ``M = X G^{-1}``,
    ``A = X G^{-1} X^T``, ``S = (I + gamma X G^{-1} Pi G^{-1} X^T)^{-1}``.
    A positive trace implies a non-positive slope.
    """
    cols = report.columns
    if cols.size == 0:
        return 0.0, 0.0
    X = data.X[:, cols]
    G = data.gram[np.ix_(cols, cols)]
    Pi = report.pi.dense()
    D = Pi + gamma * report.dpi_dgamma.dense()
    M = _solve_spd(G, X.T).T
    A = M @ X.T
    Bop = M @ Pi @ M.T
    S_M = np.linalg.solve(np.eye(data.n) + gamma * Bop, M)
    inner = S_M.T @ A @ S_M
    trace_value = float(np.trace(D @ inner))
    slope = df_slope(report, data, gamma)
    if trace_value > 0 and slope > 1e-8:
        raise AssertionError(
            f"positive trace {trace_value:.3g} with increasing df slope {slope:.3g}")
    return trace_value, slope
