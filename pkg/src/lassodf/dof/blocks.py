"""Block-structured curvature and weight-derivative matrices over active groups."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import InactiveGroupRequested
from ..model import FitResult, GroupStructure, WeightScheme
from ..weights import weight_and_derivative


@dataclass(frozen=True, eq=False)
class BlockDiagonal:
    """Matrix over the columns of the active groups.

    ``columns`` are sorted variable indices; ``blocks[k]`` acts on the
    positions ``positions[k]`` (a group's variables need not be contiguous,
    so the dense matrix is block diagonal up to a permutation).
    """

    groups: NDArray
    columns: NDArray
    positions: tuple
    blocks: tuple

    @property
    def size(self) -> int:
        return int(self.columns.size)

    def dense(self) -> NDArray:
        out = np.zeros((self.size, self.size))
        for pos, blk in zip(self.positions, self.blocks):
            out[np.ix_(pos, pos)] = blk
        return out


def active_layout(fit: FitResult, groups: GroupStructure):
    """Active groups, their columns, and each group's positions in the columns."""
    A_G = fit.active.A_G
    cols = fit.active.group_columns(groups)
    labels = groups.assignment[cols]
    positions = tuple(np.flatnonzero(labels == g) for g in A_G)
    return A_G, cols, positions


def _pi_block(b: NDArray, w: float) -> NDArray:
    if b.size == 1:
        return np.zeros((1, 1))  # identically zero, avoid roundoff
    r = float(np.linalg.norm(b))
    return w * (np.eye(b.size) / r - np.outer(b, b) / r ** 3)


def build_pi(fit: FitResult, groups: GroupStructure, w: NDArray,
             requested: NDArray | None = None, check_psd: bool = False) -> BlockDiagonal:
    """Curvature of the group penalty, w_g (I/r_g - b_g b_g^T / r_g^3) per block."""
    A_G, cols, positions = active_layout(fit, groups)
    if requested is not None:
        missing = np.setdiff1d(requested, A_G)
        if missing.size:
            raise InactiveGroupRequested(f"groups {missing.tolist()} are inactive")
    blocks = []
    for g, pos in zip(A_G, positions):
        blk = _pi_block(fit.beta[cols[pos]], float(w[g]))
        if check_psd:
            ev = np.linalg.eigvalsh(blk)
            assert ev.min() >= -1e-10 * max(1.0, ev.max()), "curvature block not PSD"
        blocks.append(blk)
    return BlockDiagonal(A_G, cols, positions, tuple(blocks))


def build_phi(fit: FitResult, beta_ls: NDArray, groups: GroupStructure,
              scheme: WeightScheme) -> BlockDiagonal:
    """Weight-derivative term: (b_g/r_g) w'_g(L_g) (b_ls_g)^T / L_g per block.

    ``L_g`` is the norm of the least-squares block.  The derivative carries its
    own sign (negative for decreasing weights).
    """
    A_G, cols, positions = active_layout(fit, groups)
    L = groups.norms(beta_ls)
    _, dw = weight_and_derivative(scheme, L)
    blocks = []
    for g, pos in zip(A_G, positions):
        b = fit.beta[cols[pos]]
        bls = beta_ls[cols[pos]]
        r = float(np.linalg.norm(b))
        blocks.append(np.outer(b / r, bls / L[g]) * dw[g])
    return BlockDiagonal(A_G, cols, positions, tuple(blocks))


def build_phi_inverse_norm(fit: FitResult, beta_ls: NDArray,
                           groups: GroupStructure) -> BlockDiagonal:
    """Positive-sign weight-derivative term for w_g = 1/L_g.

    Equals ``-build_phi`` under the inverse-norm scheme; used with a plus
    sign in the df trace.
    """
    A_G, cols, positions = active_layout(fit, groups)
    L = groups.norms(beta_ls)
    blocks = []
    for g, pos in zip(A_G, positions):
        b = fit.beta[cols[pos]]
        r = float(np.linalg.norm(b))
        blocks.append(np.outer(b / r, beta_ls[cols[pos]]) / L[g] ** 3)
    return BlockDiagonal(A_G, cols, positions, tuple(blocks))
