"""Declarative linear PDEs and assembly of constraint row blocks.

The operator form is

    time_coeff * u_t + sum_j a_j(x, t) u_xj - sum_j nu_j u_xjxj
        + identity * u = R(x, t)

with Dirichlet or periodic boundary data and, for time-dependent
problems, initial data at t = 0.  `identity` is a zeroth-order
coefficient used by the pure function-representation problems (fit rows
are then raw feature rows with rhs = target).

All data callbacks (advection coefficients, source, boundary, initial,
exact) receive the full (N, dim_total) point array, spatial axes first
and time last, and return a length-N vector.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ._accel import maybe_njit
from . import geometry
from .features import FeatureLayer, eval_features, _pre_activation, _phi1


@dataclass(frozen=True)
class LinearPde:
    spatial_dim: int
    time_dependent: bool = False
    time_coeff: float = 0.0
    advection: tuple = ()
    diffusion: tuple = ()
    source: Optional[Callable] = None
    identity: float = 0.0

    def __post_init__(self):
        adv = tuple(self.advection) if self.advection else (0.0,) * self.spatial_dim
        dif = tuple(self.diffusion) if self.diffusion else (0.0,) * self.spatial_dim
        if len(adv) != self.spatial_dim or len(dif) != self.spatial_dim:
            raise ValueError("advection/diffusion must have one entry per spatial axis")
        if any(v < 0 for v in dif):
            raise ValueError("diffusion constants must be >= 0")
        object.__setattr__(self, "advection", adv)
        object.__setattr__(self, "diffusion", dif)
        has_adv = any(callable(a) or a != 0.0 for a in adv)
        if not (self.time_coeff or has_adv or any(dif) or self.identity):
            raise ValueError("operator is identically zero")
        if self.time_coeff and not self.time_dependent:
            raise ValueError("time_coeff requires a time-dependent problem")

    @property
    def total_dim(self) -> int:
        return self.spatial_dim + (1 if self.time_dependent else 0)


@dataclass(frozen=True)
class Dirichlet:
    """Prescribed values on the boundary; `faces` restricts the condition to
    specific boundary tags (e.g. the inflow side), None means all."""

    value: Callable
    faces: Optional[tuple] = None


@dataclass(frozen=True)
class Periodic:
    """Paired-face equality on box domains."""


BoundarySpec = Union[Dirichlet, Periodic]


@dataclass(frozen=True)
class Problem:
    pde: LinearPde
    domain: geometry.Domain
    boundary: BoundarySpec
    initial: Optional[Callable] = None
    exact: Optional[Callable] = None

    def __post_init__(self):
        if self.pde.time_dependent != (self.initial is not None):
            raise ValueError("initial data must be present iff the PDE is time-dependent")
        if geometry.dimension(self.domain) != self.pde.total_dim:
            raise ValueError("domain dimension does not match the operator")


def _coefficient_values(coeff, pts: np.ndarray) -> np.ndarray:
    if callable(coeff):
        return np.asarray(coeff(pts), dtype=np.float64).reshape(pts.shape[0])
    return np.full(pts.shape[0], float(coeff))


@maybe_njit
def _residual_kernel(z, alpha, beta, ident):
    # row = alpha * phi'(z) - beta * phi''(z) + ident * phi(z), fused so the
    # tanh is evaluated once
    t = np.tanh(z)
    p1 = 1.0 - t * t
    return alpha * p1 + 2.0 * beta * (t * p1) + ident * t


def residual_rows(pde: LinearPde, layer: FeatureLayer, pts: np.ndarray):
    """Interior residual block: one row per collocation point.

    Row entry (i, k) = time_coeff * w_kt phi'(z_ik)
                     + sum_j a_j(p_i) w_kj phi'(z_ik)
                     - sum_j nu_j w_kj^2 phi''(z_ik)
                     + identity * phi(z_ik),
    rhs = R(p_i) (zero when no source is given).
    """
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != pde.total_dim:
        raise ValueError(f"points must have shape (N, {pde.total_dim}), got {pts.shape}")
    if layer.dim != pde.total_dim:
        raise ValueError("layer dimension does not match the operator")
    z = _pre_activation(layer, pts)
    coeffs = np.empty((pts.shape[0], pde.total_dim))
    for j in range(pde.spatial_dim):
        coeffs[:, j] = _coefficient_values(pde.advection[j], pts)
    if pde.time_dependent:
        coeffs[:, -1] = pde.time_coeff
    alpha = coeffs @ layer.weights.T
    w_sp = layer.weights[:, : pde.spatial_dim]
    beta = w_sp * w_sp @ np.asarray(pde.diffusion)
    rows = _residual_kernel(z, alpha, beta, float(pde.identity))
    rhs = _coefficient_values(pde.source, pts) if pde.source is not None else np.zeros(pts.shape[0])
    return rows, rhs


def dirichlet_rows(layer: FeatureLayer, pts: np.ndarray, value: Callable):
    """Boundary rows: raw features with rhs = prescribed values."""
    pts = np.asarray(pts, dtype=np.float64)
    return eval_features(layer, pts), _coefficient_values(value, pts)


def periodic_rows(layer: FeatureLayer, left_pts: np.ndarray, right_pts: np.ndarray):
    """Paired-face rows: features(left) - features(right), rhs = 0.

    Partners must agree in every non-paired coordinate (time, transverse
    axes); a mismatch means an unpaired point and is a hard error.
    """
    left_pts = np.asarray(left_pts, dtype=np.float64)
    right_pts = np.asarray(right_pts, dtype=np.float64)
    if left_pts.shape != right_pts.shape:
        raise ValueError("periodic partner lists differ in length")
    if left_pts.shape[1] > 1 and not np.allclose(
        left_pts[:, 1:], right_pts[:, 1:], atol=geometry.BOUNDARY_TOL, rtol=0.0
    ):
        raise ValueError("periodic partners do not match in the shared coordinates")
    rows = eval_features(layer, left_pts) - eval_features(layer, right_pts)
    return rows, np.zeros(left_pts.shape[0])


def initial_rows(layer: FeatureLayer, pts: np.ndarray, value: Callable):
    """Initial-condition rows at t = 0: raw features with rhs = F."""
    pts = np.asarray(pts, dtype=np.float64)
    if pts.shape[0] and np.any(pts[:, -1] != 0.0):
        raise ValueError("initial points must have t = 0 exactly")
    return eval_features(layer, pts), _coefficient_values(value, pts)


def normal_derivative_rows(layer: FeatureLayer, pts: np.ndarray, axis: int) -> np.ndarray:
    """First-derivative feature rows along one axis (used by C1 stitching)."""
    pts = np.asarray(pts, dtype=np.float64)
    z = _pre_activation(layer, pts)
    return layer.weights[:, axis] * _phi1(z)


# ---------------------------------------------------------------------------
# affine rescaling to a reference box

@dataclass(frozen=True)
class AffineMap:
    """Affine map between a box [lo, hi] and the reference box [-1, 1]^d."""

    center: np.ndarray
    halfwidth: np.ndarray

    @classmethod
    def from_box(cls, lo, hi) -> "AffineMap":
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if np.any(hi - lo <= 0):
            raise ValueError("degenerate box")
        return cls(0.5 * (lo + hi), 0.5 * (hi - lo))

    def to_local(self, pts: np.ndarray) -> np.ndarray:
        return (np.asarray(pts, dtype=np.float64) - self.center) / self.halfwidth

    def to_global(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=np.float64) * self.halfwidth + self.center


def rescale_pde(pde: LinearPde, amap: AffineMap) -> LinearPde:
    """Express the operator in reference-box coordinates.

    The chain rule scales first-order coefficients by 1/h and diffusion by
    1/h^2; coefficient callables still see global coordinates, so the
    rescaled operator satisfies the same constraints row for row.
    """
    h = amap.halfwidth

    def scaled_advection(j):
        a = pde.advection[j]
        if callable(a):
            return lambda pts, _a=a, _hj=h[j]: np.asarray(_a(amap.to_global(pts))) / _hj
        return a / h[j]

    adv = tuple(scaled_advection(j) for j in range(pde.spatial_dim))
    dif = tuple(pde.diffusion[j] / h[j] ** 2 for j in range(pde.spatial_dim))
    tcoef = pde.time_coeff / h[-1] if pde.time_dependent else 0.0
    source = None
    if pde.source is not None:
        source = lambda pts: np.asarray(pde.source(amap.to_global(pts)))
    return LinearPde(
        spatial_dim=pde.spatial_dim,
        time_dependent=pde.time_dependent,
        time_coeff=tcoef,
        advection=adv,
        diffusion=dif,
        source=source,
        identity=pde.identity,
    )


def wrap_global(fn: Optional[Callable], amap: AffineMap) -> Optional[Callable]:
    """Adapt a global-coordinate callback to reference-box points."""
    if fn is None:
        return None
    return lambda pts: np.asarray(fn(amap.to_global(pts)))
