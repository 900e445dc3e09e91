"""Piecewise-linear structure of the adaptive lasso df along a path."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import PathResult


@dataclass(frozen=True)
class IntervalSlope:
    gamma_high: float
    gamma_low: float
    active_size: int
    slope: float
    n_points: int


def slopes_along_path(path: PathResult) -> list[IntervalSlope]:
    """Slope b of df = |A| + b gamma on each constant-active-set run of the grid.

    Runs with two or more grid points use the two extreme points; a single
    point uses the intercept |A| as the second point.  Runs are listed in
    grid order, i.e. from large to small gamma.
    """
    out = []
    i = 0
    m = len(path.gammas)
    while i < m:
        if path.fits[i] is None or path.dofs[i] is None:
            i += 1
            continue
        j = i
        while (j + 1 < m and path.fits[j + 1] is not None
               and path.dofs[j + 1] is not None
               and path.fits[j + 1].active.same_as(path.fits[i].active)):
            j += 1
        k = path.fits[i].active.size
        g_hi, g_lo = float(path.gammas[i]), float(path.gammas[j])
        if j > i:
            b = (path.dofs[i].value - path.dofs[j].value) / (g_hi - g_lo)
        else:
            b = (path.dofs[i].value - k) / g_hi
        out.append(IntervalSlope(g_hi, g_lo, k, float(b), j - i + 1))
        i = j + 1
    return out


def slopes_diminishing(slopes: list[IntervalSlope], rtol: float = 1e-9) -> bool:
    """Positive slopes that strictly shrink as the active set shrinks.

    Empty-set runs have zero slope and are ignored.
    """
    runs = [s for s in slopes if s.active_size > 0]
    if any(s.slope <= 0 for s in runs):
        return False
    for big_gamma, small_gamma in zip(runs[:-1], runs[1:]):
        if big_gamma.active_size < small_gamma.active_size:
            if not small_gamma.slope > big_gamma.slope * (1 + rtol):
                return False
    return True
