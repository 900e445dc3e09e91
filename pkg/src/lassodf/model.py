"""Value types shared across the package."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigError, ConstantColumn

ACTIVE_RTOL = 1e-10


def _readonly(a: ArrayLike, dtype=float) -> NDArray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix and response, plus what is needed to undo standardization.

    ``rotation`` is the triangular factor R when the standardized design was
    additionally orthonormalized (stored X equals Z R^{-1} for the scaled
    design Z).
    """

    X: NDArray
    y: NDArray
    column_means: Optional[NDArray] = None
    column_scales: Optional[NDArray] = None
    standardized: bool = False
    y_offset: float = 0.0
    rotation: Optional[NDArray] = None

    def __post_init__(self):
        X = _readonly(self.X)
        y = _readonly(self.y)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ConfigError(f"incompatible shapes X{X.shape}, y{y.shape}")
        if X.shape[0] < 1:
            raise ConfigError("need at least one observation")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ConfigError("data contain non-finite values")
        p = X.shape[1]
        means = np.zeros(p) if self.column_means is None else self.column_means
        scales = np.ones(p) if self.column_scales is None else self.column_scales
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "column_means", _readonly(means))
        object.__setattr__(self, "column_scales", _readonly(scales))
        if self.rotation is not None:
            object.__setattr__(self, "rotation", _readonly(self.rotation))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @cached_property
    def gram(self) -> NDArray:
        G = self.X.T @ self.X
        G = 0.5 * (G + G.T)
        G.setflags(write=False)
        return G

    @cached_property
    def xty(self) -> NDArray:
        c = self.X.T @ self.y
        c.setflags(write=False)
        return c

    @cached_property
    def is_orthonormal(self) -> bool:
        return bool(np.max(np.abs(self.gram - np.eye(self.p)), initial=0.0) <= 1e-10)

    def with_response(self, y: ArrayLike) -> "Dataset":
        """Same design, new response. Cached Gram is carried over."""
        out = Dataset(self.X, y, self.column_means, self.column_scales,
                      self.standardized, self.y_offset, self.rotation)
        if "gram" in self.__dict__:
            out.__dict__["gram"] = self.gram
        return out

    def subset(self, rows: ArrayLike) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.X[rows], self.y[rows], self.column_means,
                       self.column_scales, self.standardized, self.y_offset,
                       self.rotation)

    def destandardize(self, beta: ArrayLike) -> tuple[float, NDArray]:
        """Map coefficients on the stored design back to the raw scale.

        Returns ``(intercept, coefficients)`` such that
        ``intercept + X_raw @ coefficients`` reproduces the fitted values.
        """
        b = np.asarray(beta, dtype=float)
        if self.rotation is not None:
            import scipy.linalg as sla
            b = sla.solve_triangular(self.rotation, b)
        coef = b / self.column_scales
        intercept = self.y_offset - float(self.column_means @ coef)
        return intercept, coef


def standardize(raw: Dataset, orthonormalize: bool = False,
                center_response: bool = True) -> Dataset:
    """Center columns and scale them to Euclidean norm sqrt(n).

    With ``orthonormalize=True`` the scaled design is further replaced by the
    Q factor of its QR decomposition, so that ``X^T X = I`` holds exactly
    up to roundoff.
    """
    if raw.standardized and (raw.rotation is not None) == orthonormalize:
        return raw
    X = np.asarray(raw.X, dtype=float)
    n, p = X.shape
    if n < 2:
        raise ConfigError("standardizing needs at least two observations")
    means = X.mean(axis=0)
    Z = X - means
    norms = np.linalg.norm(Z, axis=0)
    for j in range(p):
        if norms[j] <= 1e-12 * (1.0 + np.abs(X[:, j]).max()) * np.sqrt(n):
            raise ConstantColumn(j)
    scales = norms / np.sqrt(n)
    Z = Z / scales
    y_offset = float(raw.y.mean()) if center_response else 0.0
    y = raw.y - y_offset
    rotation = None
    if orthonormalize:
        Q, R = np.linalg.qr(Z, mode="reduced")
        signs = np.sign(np.diag(R))
        signs[signs == 0] = 1.0
        Z = Q * signs
        rotation = R * signs[:, None]
    return Dataset(Z, y, means, scales, True, y_offset, rotation)


@dataclass(frozen=True, eq=False)
class GroupStructure:
    """Assignment of each variable to a group, 0-based labels ``0..G-1``.

    Groups need not be contiguous.
    """

    assignment: NDArray

    def __post_init__(self):
        a = np.asarray(self.assignment)
        if a.ndim != 1 or a.size == 0:
            raise ConfigError("group assignment must be a non-empty vector")
        if not np.issubdtype(a.dtype, np.integer):
            if not np.all(a == np.round(a)):
                raise ConfigError("group labels must be integers")
            a = a.astype(np.int64)
        labels = np.unique(a)
        if labels[0] != 0 or labels[-1] != labels.size - 1:
            raise ConfigError("group labels must be exactly 0..G-1 with no gaps")
        object.__setattr__(self, "assignment", _readonly(a, np.int64))

    @classmethod
    def contiguous(cls, sizes: ArrayLike) -> "GroupStructure":
        sizes = np.asarray(sizes, dtype=int)
        return cls(np.repeat(np.arange(sizes.size), sizes))

    @classmethod
    def singletons(cls, p: int) -> "GroupStructure":
        return cls(np.arange(p))

    @property
    def p(self) -> int:
        return self.assignment.size

    @cached_property
    def n_groups(self) -> int:
        return int(self.assignment.max()) + 1

    @cached_property
    def sizes(self) -> NDArray:
        s = np.bincount(self.assignment, minlength=self.n_groups)
        s.setflags(write=False)
        return s

    @cached_property
    def _members(self) -> tuple[NDArray, ...]:
        return tuple(np.flatnonzero(self.assignment == g)
                     for g in range(self.n_groups))

    def members(self, g: int) -> NDArray:
        return self._members[g]

    def norms(self, beta: ArrayLike) -> NDArray:
        b = np.asarray(beta, dtype=float)
        return np.sqrt(np.bincount(self.assignment, weights=b * b,
                                   minlength=self.n_groups))


@dataclass(frozen=True, eq=False)
class Fixed:
    """Data-independent weights."""

    w: NDArray

    def __post_init__(self):
        w = _readonly(self.w)
        if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ConfigError("fixed weights must be finite and strictly positive")
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class InversePower:
    """w(z) = z^(-alpha) applied to |least-squares coefficient|."""

    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")


@dataclass(frozen=True)
class ExponentialDecay:
    """w(z) = exp(-alpha z)."""

    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")


@dataclass(frozen=True)
class GroupInverseNorm:
    """w_g = 1 / ||least-squares block g||."""


WeightScheme = Union[Fixed, InversePower, ExponentialDecay, GroupInverseNorm]


@dataclass(frozen=True)
class Lasso:
    pass


@dataclass(frozen=True)
class AdaptiveLasso:
    scheme: WeightScheme = field(default_factory=InversePower)

    def __post_init__(self):
        if isinstance(self.scheme, GroupInverseNorm):
            object.__setattr__(self, "scheme", InversePower(1.0))


@dataclass(frozen=True, eq=False)
class GroupLasso:
    """Group penalty with fixed weights; defaults to sqrt(group size)."""

    groups: GroupStructure
    weights: Optional[NDArray] = None

    def __post_init__(self):
        w = (np.sqrt(self.groups.sizes) if self.weights is None
             else np.asarray(self.weights, dtype=float))
        if w.shape != (self.groups.n_groups,) or np.any(w <= 0) \
                or not np.all(np.isfinite(w)):
            raise ConfigError("group weights must be positive, one per group")
        object.__setattr__(self, "weights", _readonly(w))


@dataclass(frozen=True, eq=False)
class AdaptiveGroupLasso:
    groups: GroupStructure
    scheme: WeightScheme = field(default_factory=GroupInverseNorm)

    def __post_init__(self):
        if not isinstance(self.scheme, (GroupInverseNorm, Fixed)):
            raise ConfigError(
                "adaptive group weights must be group-inverse-norm or fixed")
        if isinstance(self.scheme, Fixed) and \
                self.scheme.w.shape != (self.groups.n_groups,):
            raise ConfigError("fixed group weights need one entry per group")


PenaltySpec = Union[Lasso, AdaptiveLasso, GroupLasso, AdaptiveGroupLasso]


def penalty_groups(penalty: PenaltySpec) -> Optional[GroupStructure]:
    return getattr(penalty, "groups", None)


def penalty_name(penalty: PenaltySpec) -> str:
    return {Lasso: "lasso", AdaptiveLasso: "adaptive",
            GroupLasso: "group", AdaptiveGroupLasso: "adaptive-group"}[type(penalty)]


def active_threshold(beta: ArrayLike) -> float:
    b = np.asarray(beta, dtype=float)
    return ACTIVE_RTOL * max(1.0, float(np.max(np.abs(b), initial=0.0)))


@dataclass(frozen=True, eq=False)
class ActiveSets:
    """Active variables ``A_p``, active groups ``A_G`` and rank map ``pi``."""

    A_p: NDArray
    A_G: NDArray

    @classmethod
    def from_beta(cls, beta: ArrayLike,
                  groups: Optional[GroupStructure] = None) -> "ActiveSets":
        b = np.asarray(beta, dtype=float)
        thr = active_threshold(b)
        if groups is None:
            A_p = np.flatnonzero(np.abs(b) > thr)
            return cls(_readonly(A_p, np.int64), _readonly([], np.int64))
        A_G = np.flatnonzero(groups.norms(b) > thr)
        in_active = np.isin(groups.assignment, A_G)
        A_p = np.flatnonzero(in_active & (np.abs(b) > thr))
        return cls(_readonly(A_p, np.int64), _readonly(A_G, np.int64))

    @property
    def size(self) -> int:
        return int(self.A_p.size)

    @property
    def n_groups(self) -> int:
        return int(self.A_G.size)

    @cached_property
    def pi(self) -> dict[int, int]:
        return {int(j): r for r, j in enumerate(self.A_p)}

    def group_columns(self, groups: GroupStructure) -> NDArray:
        """All variables belonging to active groups, sorted."""
        return np.flatnonzero(np.isin(groups.assignment, self.A_G))

    def same_as(self, other: "ActiveSets") -> bool:
        return (np.array_equal(self.A_p, other.A_p)
                and np.array_equal(self.A_G, other.A_G))


@dataclass(frozen=True, eq=False)
class FitResult:
    beta: NDArray
    gamma: float
    active: ActiveSets
    kkt_residual: float
    iterations: int
    converged: bool = True
    weights: Optional[NDArray] = None
    beta_ls: Optional[NDArray] = None
    objective_trace: Optional[NDArray] = None

    def fitted(self, data: Dataset) -> NDArray:
        return data.X @ self.beta


@dataclass(frozen=True)
class DofEstimate:
    """df estimate with its decomposition.

    ``contraction`` (<= 0) is the effect of the group curvature term and
    ``inflation`` (>= 0 for decreasing weights) the effect of data-driven
    weights; ``value = base_active + contraction + inflation``.
    """

    value: float
    base_active: int
    group_active: int
    correction: float
    method: str
    near_transition: bool = False
    contraction: float = 0.0
    inflation: float = 0.0


@dataclass(eq=False)
class PathResult:
    gammas: NDArray
    fits: list
    dofs: list
    transitions: list
    penalty: PenaltySpec
    weights: Optional[NDArray] = None
    beta_ls: Optional[NDArray] = None
    criteria: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    @property
    def betas(self) -> NDArray:
        return np.vstack([f.beta for f in self.fits])

    def df_values(self) -> NDArray:
        return np.array([np.nan if d is None else d.value for d in self.dofs])
