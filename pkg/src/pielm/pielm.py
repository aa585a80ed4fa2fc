"""Single-network solver: stack all constraint rows into H c = K, solve by
pseudo-inverse, evaluate and report errors against a closed-form solution.

Assembly happens in reference-box coordinates (the domain bounding box is
affinely mapped to [-1, 1]^d) so one weight scale is meaningful across
problems; the model stores the map and converts transparently.
"""

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from . import geometry
from .features import FeatureLayer, eval_features, init_layer
from .linalg import LeastSquaresSolution, solve_least_squares
from .operators import (
    AffineMap,
    Dirichlet,
    Periodic,
    Problem,
    dirichlet_rows,
    initial_rows,
    periodic_rows,
    rescale_pde,
    residual_rows,
    wrap_global,
)


@dataclass(frozen=True)
class PielmConfig:
    """Architecture and solver settings for a single-network run.

    n_interior may be an int budget or an exact per-axis lattice tuple.
    n_neurons = None applies the sizing rule: one unknown per assembled row.
    strategy = None picks halton for polygon domains and grid for boxes.
    """

    n_interior: Union[int, tuple]
    n_boundary: int
    n_initial: int = 0
    n_neurons: Optional[int] = None
    seed: int = 0
    init_scale: float = 1.0
    method: str = "svd"
    tolerance: Optional[float] = None
    strategy: Optional[str] = None


@dataclass(frozen=True)
class PielmModel:
    layer: FeatureLayer
    coefficients: np.ndarray
    amap: AffineMap
    problem: Problem
    config: PielmConfig
    train_residual: float
    train_time: float
    rows: int
    cols: int
    effective_rank: int
    solution: LeastSquaresSolution = field(repr=False, default=None)

    def predict(self, pts: np.ndarray) -> np.ndarray:
        return evaluate(self, pts)


@dataclass(frozen=True)
class ErrorReport:
    max_abs_error: float
    l2_error: float
    grid_shape: tuple
    points: np.ndarray = field(repr=False)
    predicted: np.ndarray = field(repr=False)
    exact_values: np.ndarray = field(repr=False)

    @property
    def errors(self) -> np.ndarray:
        return self.predicted - self.exact_values


def default_strategy(domain: geometry.Domain) -> str:
    spatial = domain.spatial if isinstance(domain, geometry.TimeExtruded) else domain
    return "halton" if isinstance(spatial, geometry.Polygon) else "grid"


def _boundary_groups(problem: Problem, pts: geometry.PointSet):
    """Split tagged boundary points into dirichlet points or periodic pairs."""
    if isinstance(problem.boundary, Dirichlet):
        sel = np.ones(pts.boundary.shape[0], dtype=bool)
        if problem.boundary.faces is not None:
            sel = np.isin(pts.boundary_tags, problem.boundary.faces)
        return pts.boundary[sel], None, None
    if isinstance(problem.boundary, Periodic):
        partner = pts.boundary_partner
        left = np.flatnonzero((partner >= 0) & (partner > np.arange(partner.size)))
        if left.size == 0:
            raise ValueError("periodic boundary requires paired boundary points")
        return None, pts.boundary[left], pts.boundary[partner[left]]
    raise TypeError(f"unknown boundary spec {type(problem.boundary).__name__}")


def count_rows(problem: Problem, pts: geometry.PointSet) -> int:
    dir_pts, per_left, _ = _boundary_groups(problem, pts)
    n_bc = dir_pts.shape[0] if dir_pts is not None else per_left.shape[0]
    return pts.interior.shape[0] + n_bc + pts.initial.shape[0]


def assemble(problem: Problem, layer: FeatureLayer, pts: geometry.PointSet, amap: Optional[AffineMap] = None):
    """Stack [residual rows; boundary rows; initial rows] into (H, K).

    With an AffineMap the rows are built in reference coordinates; the
    constraints are algebraically identical.
    """
    if pts.interior.shape[0] == 0:
        raise ValueError("empty interior point set")
    if amap is None:
        pde = problem.pde
        to_local = lambda p: p
        wrap = lambda fn: fn
    else:
        pde = rescale_pde(problem.pde, amap)
        to_local = amap.to_local
        wrap = lambda fn: wrap_global(fn, amap)

    blocks, rhs = [], []
    rows, b = residual_rows(pde, layer, to_local(pts.interior))
    blocks.append(rows)
    rhs.append(b)

    dir_pts, per_left, per_right = _boundary_groups(problem, pts)
    if dir_pts is not None:
        if dir_pts.shape[0]:
            rows, b = dirichlet_rows(layer, to_local(dir_pts), wrap(problem.boundary.value))
            blocks.append(rows)
            rhs.append(b)
    else:
        rows, b = periodic_rows(layer, to_local(per_left), to_local(per_right))
        blocks.append(rows)
        rhs.append(b)

    if problem.pde.time_dependent and pts.initial.shape[0]:
        if np.any(pts.initial[:, -1] != 0.0):
            raise ValueError("initial points must have t = 0 exactly")
        if amap is None:
            rows, b = initial_rows(layer, pts.initial, problem.initial)
        else:
            rows, b = dirichlet_rows(layer, to_local(pts.initial), wrap(problem.initial))
        blocks.append(rows)
        rhs.append(b)

    return np.vstack(blocks), np.concatenate(rhs)


def train(problem: Problem, config: PielmConfig) -> PielmModel:
    """Sample points, assemble, solve by least squares; deterministic in seed."""
    t0 = time.perf_counter()
    strategy = config.strategy or default_strategy(problem.domain)
    pts = geometry.sample_points(
        problem.domain, config.n_interior, config.n_boundary, config.n_initial, strategy
    )
    n_neurons = config.n_neurons or count_rows(problem, pts)
    layer = init_layer(n_neurons, problem.pde.total_dim, config.seed, config.init_scale)
    amap = AffineMap.from_box(*geometry.bounding_box(problem.domain))
    H, K = assemble(problem, layer, pts, amap)
    sol = solve_least_squares(H, K, config.method, config.tolerance)
    elapsed = time.perf_counter() - t0
    return PielmModel(
        layer=layer,
        coefficients=sol.coefficients,
        amap=amap,
        problem=problem,
        config=config,
        train_residual=sol.residual_norm,
        train_time=elapsed,
        rows=H.shape[0],
        cols=H.shape[1],
        effective_rank=sol.effective_rank,
        solution=sol,
    )


def evaluate(model: PielmModel, pts: np.ndarray) -> np.ndarray:
    """Network output at global points: features(local(pts)) . coefficients."""
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != model.layer.dim:
        raise ValueError(f"points must have shape (N, {model.layer.dim}), got {pts.shape}")
    return eval_features(model.layer, model.amap.to_local(pts)) @ model.coefficients


DEFAULT_GRIDS = {
    (1, False): (201,),
    (1, True): (101, 51),
    (2, False): (101, 101),
    (2, True): (51, 51, 21),
}


def evaluation_grid(domain: geometry.Domain, spec: Optional[tuple] = None):
    """Dense evaluation lattice over the domain, independent of training points.

    Returns (points, axes); for polygon domains the lattice is filtered by
    inclusion, so points may be fewer than the full tensor product.
    """
    timed = isinstance(domain, geometry.TimeExtruded)
    spatial = domain.spatial if timed else domain
    sdim = 1 if isinstance(spatial, geometry.Interval) else 2
    shape = tuple(spec) if spec is not None else DEFAULT_GRIDS[(sdim, timed)]
    lo, hi = geometry.bounding_box(domain)
    if len(shape) != lo.size:
        raise ValueError(f"grid spec {shape} does not match domain dimension {lo.size}")
    axes = tuple(np.linspace(lo[j], hi[j], shape[j]) for j in range(lo.size))
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids])
    if isinstance(spatial, geometry.Polygon):
        pts = pts[geometry.points_in_polygon(spatial, pts[:, :2])]
    return pts, axes


def error_report(model, exact: Optional[Callable] = None, grid: Optional[tuple] = None) -> ErrorReport:
    """Errors against the exact solution on a dense evaluation grid."""
    problem = model.problem
    exact = exact or problem.exact
    if exact is None:
        raise ValueError("no exact solution available for error reporting")
    pts, axes = evaluation_grid(problem.domain, grid)
    predicted = model.predict(pts)
    target = np.asarray(exact(pts), dtype=np.float64).reshape(-1)
    err = predicted - target
    return ErrorReport(
        max_abs_error=float(np.max(np.abs(err))) if err.size else 0.0,
        l2_error=float(np.sqrt(np.mean(err**2))) if err.size else 0.0,
        grid_shape=tuple(len(a) for a in axes),
        points=pts,
        predicted=predicted,
        exact_values=target,
    )


def oscillation_sign_changes(model, t: float, n: int = 201) -> int:
    """Sign changes of the error along x at a fixed time (1D unsteady only).

    The diagnostic that flags unphysical oscillation in failure runs.
    """
    domain = model.problem.domain
    if not (isinstance(domain, geometry.TimeExtruded) and isinstance(domain.spatial, geometry.Interval)):
        raise ValueError("oscillation diagnostic is defined for 1D unsteady problems")
    x = np.linspace(domain.spatial.lo, domain.spatial.hi, n)
    pts = np.column_stack([x, np.full(n, t)])
    err = model.predict(pts) - np.asarray(model.problem.exact(pts)).reshape(-1)
    signs = np.sign(err)
    signs = signs[signs != 0]
    return int(np.sum(signs[1:] != signs[:-1]))
