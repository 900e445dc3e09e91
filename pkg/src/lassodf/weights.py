"""Adaptive weight functions and their derivatives."""
from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateWeight
from .model import (ExponentialDecay, Fixed, GroupInverseNorm, InversePower,
                    WeightScheme)

DEGENERATE_LS = 1e-12


def weight_and_derivative(scheme: WeightScheme, z: ArrayLike) -> tuple[NDArray, NDArray]:
    """Weights w(z) and dw/dz at least-squares magnitudes ``z``.

    ``z`` holds |beta_ls_j| (per variable) or ||beta_ls_g|| (per group).  For
    ``Fixed`` the stored weights are returned unchanged with zero derivative.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if isinstance(scheme, Fixed):
        if scheme.w.shape != z.shape:
            raise ValueError(f"fixed weights have shape {scheme.w.shape}, "
                             f"expected {z.shape}")
        return scheme.w.copy(), np.zeros_like(z)
    bad = np.flatnonzero(~(z > DEGENERATE_LS))
    if bad.size:
        raise DegenerateWeight(int(bad[0]), float(z[bad[0]]))
    if isinstance(scheme, InversePower):
        a = scheme.alpha
        w = z ** (-a)
        return w, -a * w / z
    if isinstance(scheme, ExponentialDecay):
        a = scheme.alpha
        w = np.exp(-a * z)
        return w, -a * w
    if isinstance(scheme, GroupInverseNorm):
        w = 1.0 / z
        return w, -w * w
    raise TypeError(f"unknown weight scheme {scheme!r}")
