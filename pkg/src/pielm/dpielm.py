"""Cell-decomposed solver: a uniform partition of a box domain, one random
feature layer per cell, value/derivative stitching at internal faces and a
single global block least-squares solve.

Each cell assembles in its own reference coordinates (cell box mapped to
[-1, 1]^d), which is what makes small hidden layers per cell effective
regardless of cell size.  A 1x1 partition reproduces the single-network
assembly bit for bit.
"""

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry
from .features import FeatureLayer, eval_features, init_layer
from .geometry import _open_lattice
from .linalg import BlockSparseSystem, LeastSquaresSolution, solve_block_sparse
from .operators import (
    AffineMap,
    Dirichlet,
    Periodic,
    Problem,
    dirichlet_rows,
    normal_derivative_rows,
    rescale_pde,
    residual_rows,
    wrap_global,
)

DENSE_UNKNOWN_LIMIT = 10_000  # above this the iterative solver is the default


@dataclass(frozen=True)
class DpielmConfig:
    """Architecture vector: per-axis cell counts, per-axis points per cell,
    hidden-layer size per cell (the [NB..., nb..., N*] notation)."""

    cells: tuple
    cell_points: tuple
    n_neurons: int
    seed: int = 0
    init_scale: float = 1.0
    method: Optional[str] = None
    tolerance: Optional[float] = None
    max_iter: Optional[int] = None


@dataclass(frozen=True)
class CellGrid:
    """Uniform axis-aligned tiling of a box; cell indices are flat with the
    first axis fastest."""

    lo: np.ndarray
    hi: np.ndarray
    counts: tuple
    cell_points: tuple
    edges: tuple = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.counts))

    def multi_index(self, flat: int) -> tuple:
        out = []
        for c in self.counts:
            out.append(flat % c)
            flat //= c
        return tuple(out)

    def flat_index(self, multi) -> int:
        flat = 0
        for c, i in zip(reversed(self.counts), reversed(tuple(multi))):
            flat = flat * c + i
        return flat

    def cell_bounds(self, flat: int):
        multi = self.multi_index(flat)
        lo = np.array([self.edges[j][multi[j]] for j in range(self.dim)])
        hi = np.array([self.edges[j][multi[j] + 1] for j in range(self.dim)])
        return lo, hi

    def cell_map(self, flat: int) -> AffineMap:
        return AffineMap.from_box(*self.cell_bounds(flat))

    def cell_interior(self, flat: int) -> np.ndarray:
        lo, hi = self.cell_bounds(flat)
        return _open_lattice(lo, hi, self.cell_points)

    def face_points(self, flat: int, axis: int, side: int) -> np.ndarray:
        """Open lattice over the transverse axes of one cell face."""
        lo, hi = self.cell_bounds(flat)
        coord = lo[axis] if side == 0 else hi[axis]
        trans = [j for j in range(self.dim) if j != axis]
        if not trans:
            return np.array([[coord]])
        lattice = _open_lattice(lo[trans], hi[trans], tuple(self.cell_points[j] for j in trans))
        pts = np.empty((lattice.shape[0], self.dim))
        pts[:, axis] = coord
        pts[:, trans] = lattice
        return pts


def partition(domain: geometry.Domain, cells, cell_points) -> CellGrid:
    """Uniform cell grid over a box domain with per-cell interior lattices."""
    spatial = domain.spatial if isinstance(domain, geometry.TimeExtruded) else domain
    if isinstance(spatial, geometry.Polygon):
        raise ValueError("cell decomposition is defined on box domains only")
    lo, hi = geometry.bounding_box(domain)
    cells = tuple(int(c) for c in cells)
    cell_points = tuple(int(p) for p in cell_points)
    if len(cells) != lo.size or len(cell_points) != lo.size:
        raise ValueError(f"need {lo.size} per-axis counts, got {cells} / {cell_points}")
    if any(c < 1 for c in cells) or any(p < 1 for p in cell_points):
        raise ValueError("cell and point counts must be >= 1")
    if np.any(hi - lo <= 0):
        raise ValueError("zero-size axis")
    edges = tuple(np.linspace(lo[j], hi[j], cells[j] + 1) for j in range(lo.size))
    return CellGrid(lo, hi, cells, cell_points, edges)


@dataclass(frozen=True)
class InterfaceConstraint:
    """Equality of values (order 0) or normal derivatives (order 1) of two
    adjacent cells at shared-face points."""

    cell_a: int
    cell_b: int
    axis: int
    order: int
    points: np.ndarray = field(repr=False, default=None)


def plan_interfaces(grid: CellGrid, pde) -> list:
    """C0 on every internal face; C1 additionally on faces whose normal axis
    carries a nonzero diffusion coefficient.  Constraint points are the
    face's transverse lattice."""
    c1_axes = [j for j in range(pde.spatial_dim) if pde.diffusion[j] > 0]
    constraints = []
    for order, axes in ((0, range(grid.dim)), (1, c1_axes)):
        for axis in axes:
            for flat in range(grid.n_cells):
                multi = grid.multi_index(flat)
                if multi[axis] == grid.counts[axis] - 1:
                    continue
                nb = list(multi)
                nb[axis] += 1
                constraints.append(
                    InterfaceConstraint(flat, grid.flat_index(nb), axis, order, grid.face_points(flat, axis, 1))
                )
    return constraints


@dataclass(frozen=True)
class DpielmModel:
    grid: CellGrid
    layers: tuple
    amaps: tuple
    coefficients: np.ndarray
    offsets: np.ndarray
    problem: Problem
    config: DpielmConfig
    train_residual: float
    train_time: float
    rows: int
    cols: int
    solution: LeastSquaresSolution = field(repr=False, default=None)

    def cell_coefficients(self, flat: int) -> np.ndarray:
        return self.coefficients[self.offsets[flat] : self.offsets[flat + 1]]

    def predict(self, pts: np.ndarray) -> np.ndarray:
        return evaluate_dpielm(self, pts)


def _outer_faces(grid: CellGrid, flat: int, axes) -> list:
    multi = grid.multi_index(flat)
    faces = []
    for ax in axes:
        if multi[ax] == 0:
            faces.append((ax, 0))
        if multi[ax] == grid.counts[ax] - 1:
            faces.append((ax, 1))
    return faces


def assemble_global(problem: Problem, grid: CellGrid, layers, constraints) -> BlockSparseSystem:
    """Stack per-cell residual/boundary/initial blocks and interface rows.

    Every row touches at most two cells' column ranges; interface rows carry
    +rows for the lower-index cell and -rows for its neighbour, rhs 0.
    """
    if len(layers) != grid.n_cells:
        raise ValueError(f"expected {grid.n_cells} layers, got {len(layers)}")
    pde = problem.pde
    sdim = pde.spatial_dim
    offsets = np.concatenate([[0], np.cumsum([ly.n_neurons for ly in layers])]).astype(int)
    amaps = [grid.cell_map(i) for i in range(grid.n_cells)]
    local_pdes = [rescale_pde(pde, amaps[i]) for i in range(grid.n_cells)]

    blocks, rhs_parts = [], []
    row = 0

    def emit(r0, cell, values, rhs_vec):
        blocks.append((r0, r0 + values.shape[0], offsets[cell], offsets[cell + 1], values))
        rhs_parts.append(np.asarray(rhs_vec, dtype=np.float64).reshape(-1))

    # interior residuals, cell by cell
    for i in range(grid.n_cells):
        pts = grid.cell_interior(i)
        rows_i, b = residual_rows(local_pdes[i], layers[i], amaps[i].to_local(pts))
        emit(row, i, rows_i, b)
        row += rows_i.shape[0]

    # outer boundary conditions on spatial faces
    if isinstance(problem.boundary, Dirichlet):
        wanted = problem.boundary.faces
        for i in range(grid.n_cells):
            pts = []
            for ax, side in _outer_faces(grid, i, range(sdim)):
                if wanted is not None and 2 * ax + side not in wanted:
                    continue
                pts.append(grid.face_points(i, ax, side))
            if not pts:
                continue
            pts = np.vstack(pts)
            rows_i, b = dirichlet_rows(layers[i], amaps[i].to_local(pts), wrap_global(problem.boundary.value, amaps[i]))
            emit(row, i, rows_i, b)
            row += rows_i.shape[0]
    elif isinstance(problem.boundary, Periodic):
        if sdim != 1:
            raise NotImplementedError("periodic stitching is implemented for one spatial axis")
        for i in range(grid.n_cells):
            multi = grid.multi_index(i)
            if multi[0] != 0:
                continue
            j = grid.flat_index((grid.counts[0] - 1,) + multi[1:])
            lp = grid.face_points(i, 0, 0)
            rp = grid.face_points(j, 0, 1)
            left = eval_features(layers[i], amaps[i].to_local(lp))
            right = eval_features(layers[j], amaps[j].to_local(rp))
            n = left.shape[0]
            blocks.append((row, row + n, offsets[i], offsets[i + 1], left))
            blocks.append((row, row + n, offsets[j], offsets[j + 1], -right))
            rhs_parts.append(np.zeros(n))
            row += n
    else:
        raise TypeError(f"unknown boundary spec {type(problem.boundary).__name__}")

    # initial conditions on the t = 0 face
    if pde.time_dependent:
        t_ax = grid.dim - 1
        for i in range(grid.n_cells):
            if grid.multi_index(i)[t_ax] != 0:
                continue
            pts = grid.face_points(i, t_ax, 0)
            if np.any(pts[:, -1] != 0.0):
                raise ValueError("initial face points must have t = 0 exactly")
            rows_i, b = dirichlet_rows(layers[i], amaps[i].to_local(pts), wrap_global(problem.initial, amaps[i]))
            emit(row, i, rows_i, b)
            row += rows_i.shape[0]

    # interface stitching
    for con in constraints:
        a, b_cell, ax = con.cell_a, con.cell_b, con.axis
        la, lb = amaps[a].to_local(con.points), amaps[b_cell].to_local(con.points)
        if con.order == 0:
            va = eval_features(layers[a], la)
            vb = eval_features(layers[b_cell], lb)
        else:
            ha = amaps[a].halfwidth[ax]
            hb = amaps[b_cell].halfwidth[ax]
            va = normal_derivative_rows(layers[a], la, ax) / ha
            vb = normal_derivative_rows(layers[b_cell], lb, ax) / hb
        n = va.shape[0]
        blocks.append((row, row + n, offsets[a], offsets[a + 1], va))
        blocks.append((row, row + n, offsets[b_cell], offsets[b_cell + 1], -vb))
        rhs_parts.append(np.zeros(n))
        row += n

    return BlockSparseSystem(blocks, row, int(offsets[-1]), np.concatenate(rhs_parts))


def train_dpielm(problem: Problem, config: DpielmConfig) -> DpielmModel:
    """Partition, install one layer per cell (seed + cell index), solve the
    global block system in one least-squares shot."""
    t0 = time.perf_counter()
    grid = partition(problem.domain, config.cells, config.cell_points)
    layers = tuple(
        init_layer(config.n_neurons, grid.dim, config.seed + i, config.init_scale)
        for i in range(grid.n_cells)
    )
    constraints = plan_interfaces(grid, problem.pde)
    system = assemble_global(problem, grid, layers, constraints)
    method = config.method
    if method is None:
        method = "densify_svd" if system.total_cols < DENSE_UNKNOWN_LIMIT else "iterative_lsqr"
    sol = solve_block_sparse(system, method, config.tolerance, config.max_iter)
    offsets = np.concatenate([[0], np.cumsum([ly.n_neurons for ly in layers])]).astype(int)
    elapsed = time.perf_counter() - t0
    return DpielmModel(
        grid=grid,
        layers=layers,
        amaps=tuple(grid.cell_map(i) for i in range(grid.n_cells)),
        coefficients=sol.coefficients,
        offsets=offsets,
        problem=problem,
        config=config,
        train_residual=sol.residual_norm,
        train_time=elapsed,
        rows=system.total_rows,
        cols=system.total_cols,
        solution=sol,
    )


def locate_cells(grid: CellGrid, pts: np.ndarray) -> np.ndarray:
    """Flat cell index per point; ties on internal faces resolve to the
    lower-index cell.  Points outside the box are a hard error."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    tol = geometry.BOUNDARY_TOL
    if np.any(pts < grid.lo - tol) or np.any(pts > grid.hi + tol):
        raise ValueError("point outside the decomposed domain")
    flat = np.zeros(pts.shape[0], dtype=np.int64)
    stride = 1
    for j in range(grid.dim):
        idx = np.searchsorted(grid.edges[j], pts[:, j], side="left") - 1
        idx = np.clip(idx, 0, grid.counts[j] - 1)
        flat += stride * idx
        stride *= grid.counts[j]
    return flat


def evaluate_dpielm(model: DpielmModel, pts: np.ndarray) -> np.ndarray:
    """Evaluate each point with its containing cell's local network."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    flat = locate_cells(model.grid, pts)
    out = np.empty(pts.shape[0])
    for cell in np.unique(flat):
        sel = flat == cell
        local = model.amaps[cell].to_local(pts[sel])
        out[sel] = eval_features(model.layers[cell], local) @ model.cell_coefficients(cell)
    return out
