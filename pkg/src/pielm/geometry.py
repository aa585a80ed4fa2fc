"""Computational domains and deterministic collocation point sampling.

Domains are intervals, axis-aligned rectangles, simple polygons and their
time extrusions.  Point coordinates are ordered spatial-first with time
last, matching the feature-layer axis convention.

Sampling rules (all deterministic):

* grid: open per-axis lattice, lo + (hi - lo) * (i + 1) / (k + 1).  An
  integer budget n uses k = floor(n^(1/d)) per axis (count <= n); a tuple
  gives exact per-axis counts.  On polygons the bounding-box lattice is
  filtered by inclusion.
* halton: the 2,3,5-base Halton sequence (indices from 1) mapped to the
  bounding box and filtered by inclusion until n points are accepted.
* boundaries: arc-length-uniform perimeter placement at s = (i + 0.5) L / n
  tagged by edge index; 1D time extrusions place n/2 time levels on each
  of x = lo and x = hi, paired for periodic use.
"""

import importlib.resources
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._accel import NUMBA_ENABLED, maybe_njit

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"degenerate interval [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Rectangle:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("degenerate rectangle")

    def vertices(self) -> np.ndarray:
        return np.array(
            [[self.x0, self.y0], [self.x1, self.y0], [self.x1, self.y1], [self.x0, self.y1]]
        )


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper or touching intersection of segments p1p2 and p3p4."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c):
        return (
            min(a[0], b[0]) - BOUNDARY_TOL <= c[0] <= max(a[0], b[0]) + BOUNDARY_TOL
            and min(a[1], b[1]) - BOUNDARY_TOL <= c[1] <= max(a[1], b[1]) + BOUNDARY_TOL
        )

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    if d1 == 0 and on_segment(p3, p4, p1):
        return True
    if d2 == 0 and on_segment(p3, p4, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, p3):
        return True
    if d4 == 0 and on_segment(p1, p2, p4):
        return True
    return False


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, vertices in order, implicitly closed."""

    vertices: np.ndarray = field(repr=False)

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ValueError("polygon needs at least 3 (x, y) vertices")
        object.__setattr__(self, "vertices", verts)
        x, y = verts[:, 0], verts[:, 1]
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        if abs(area) < 1e-14:
            raise ValueError("polygon has zero area")
        n = verts.shape[0]
        for i in range(n):
            a1, a2 = verts[i], verts[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue  # adjacent edges share a vertex by construction
                b1, b2 = verts[j], verts[(j + 1) % n]
                if _segments_intersect(a1, a2, b1, b2):
                    raise ValueError(f"polygon self-intersects between edges {i} and {j}")


@dataclass(frozen=True)
class TimeExtruded:
    spatial: Union[Interval, Rectangle, Polygon]
    t_final: float

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError(f"time horizon must be positive, got {self.t_final}")


Domain = Union[Interval, Rectangle, Polygon, TimeExtruded]


@dataclass(frozen=True)
class PointSet:
    """Tagged collocation points: interior (N_f, d), boundary (N_bc, d) with
    per-point edge/face tags and periodic partner indices (-1 if unpaired),
    initial (N_ic, d) at t = 0 (empty for steady problems)."""

    interior: np.ndarray
    boundary: np.ndarray
    boundary_tags: np.ndarray
    boundary_partner: np.ndarray
    initial: np.ndarray


def dimension(domain: Domain) -> int:
    if isinstance(domain, Interval):
        return 1
    if isinstance(domain, (Rectangle, Polygon)):
        return 2
    if isinstance(domain, TimeExtruded):
        return dimension(domain.spatial) + 1
    raise TypeError(f"unknown domain {type(domain).__name__}")


def bounding_box(domain: Domain) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(domain, Interval):
        return np.array([domain.lo]), np.array([domain.hi])
    if isinstance(domain, Rectangle):
        return np.array([domain.x0, domain.y0]), np.array([domain.x1, domain.y1])
    if isinstance(domain, Polygon):
        return domain.vertices.min(axis=0), domain.vertices.max(axis=0)
    if isinstance(domain, TimeExtruded):
        lo, hi = bounding_box(domain.spatial)
        return np.append(lo, 0.0), np.append(hi, domain.t_final)
    raise TypeError(f"unknown domain {type(domain).__name__}")


# ---------------------------------------------------------------------------
# point-in-polygon

@maybe_njit
def _pip_jit(px, py, vx, vy, tol):
    n = vx.size
    out = np.zeros(px.size, dtype=np.bool_)
    for p in range(px.size):
        x, y = px[p], py[p]
        inside = False
        on_edge = False
        for i in range(n):
            x1, y1 = vx[i], vy[i]
            x2, y2 = vx[(i + 1) % n], vy[(i + 1) % n]
            # distance to the edge segment
            dx, dy = x2 - x1, y2 - y1
            seg2 = dx * dx + dy * dy
            t = ((x - x1) * dx + (y - y1) * dy) / seg2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            ex, ey = x1 + t * dx - x, y1 + t * dy - y
            if ex * ex + ey * ey <= tol * tol:
                on_edge = True
                break
            # even-odd ray crossing
            if (y1 > y) != (y2 > y):
                xs = x1 + (y - y1) * dx / dy
                if x < xs:
                    inside = not inside
        out[p] = on_edge or inside
    return out


def _pip_numpy(px, py, vx, vy, tol):
    x1, y1 = vx, vy
    x2, y2 = np.roll(vx, -1), np.roll(vy, -1)
    dx, dy = x2 - x1, y2 - y1
    seg2 = dx * dx + dy * dy
    t = ((px[:, None] - x1) * dx + (py[:, None] - y1) * dy) / seg2
    t = np.clip(t, 0.0, 1.0)
    ex = x1 + t * dx - px[:, None]
    ey = y1 + t * dy - py[:, None]
    on_edge = np.any(ex * ex + ey * ey <= tol * tol, axis=1)
    straddles = (y1 > py[:, None]) != (y2 > py[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = x1 + (py[:, None] - y1) * dx / dy
    crossings = np.sum(straddles & (px[:, None] < xs), axis=1)
    return on_edge | (crossings % 2 == 1)


def points_in_polygon(poly: Polygon, points: np.ndarray) -> np.ndarray:
    """Even-odd inclusion test; points within BOUNDARY_TOL of an edge count
    as inside."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    px = np.ascontiguousarray(points[:, 0])
    py = np.ascontiguousarray(points[:, 1])
    vx = np.ascontiguousarray(poly.vertices[:, 0])
    vy = np.ascontiguousarray(poly.vertices[:, 1])
    if NUMBA_ENABLED:
        return _pip_jit(px, py, vx, vy, BOUNDARY_TOL)
    return _pip_numpy(px, py, vx, vy, BOUNDARY_TOL)


def point_in_polygon(poly: Polygon, point) -> bool:
    return bool(points_in_polygon(poly, np.asarray(point, dtype=np.float64).reshape(1, 2))[0])


def contains(domain: Domain, points: np.ndarray) -> np.ndarray:
    """Inclusive membership mask (boundary counts as inside)."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if isinstance(domain, Polygon):
        return points_in_polygon(domain, points)
    if isinstance(domain, TimeExtruded):
        ok_t = (points[:, -1] >= -BOUNDARY_TOL) & (points[:, -1] <= domain.t_final + BOUNDARY_TOL)
        return contains(domain.spatial, points[:, :-1]) & ok_t
    lo, hi = bounding_box(domain)
    return np.all((points >= lo - BOUNDARY_TOL) & (points <= hi + BOUNDARY_TOL), axis=1)


# ---------------------------------------------------------------------------
# Halton sequence

@maybe_njit
def _halton_jit(start, count, bases):
    out = np.empty((count, bases.size))
    for j in range(bases.size):
        b = bases[j]
        for k in range(count):
            i = start + k
            f = 1.0
            r = 0.0
            while i > 0:
                f /= b
                r += f * (i % b)
                i //= b
            out[k, j] = r
    return out


def _halton_numpy(start, count, bases):
    out = np.empty((count, bases.size))
    idx0 = np.arange(start, start + count, dtype=np.int64)
    for j, b in enumerate(bases):
        idx = idx0.copy()
        f = 1.0
        r = np.zeros(count)
        while idx.max() > 0:
            f /= b
            r += f * (idx % b)
            idx //= b
        out[:, j] = r
    return out


def halton_points(start: int, count: int, dim: int) -> np.ndarray:
    """Halton points in (0, 1)^dim with bases 2, 3, 5; indices from `start`."""
    bases = np.array([2, 3, 5][:dim], dtype=np.int64)
    if NUMBA_ENABLED:
        return _halton_jit(start, count, bases)
    return _halton_numpy(start, count, bases)


# ---------------------------------------------------------------------------
# interior sampling

def _open_lattice(lo, hi, counts):
    axes = [lo[j] + (hi[j] - lo[j]) * (np.arange(1, k + 1) / (k + 1)) for j, k in enumerate(counts)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def _is_box(domain: Domain) -> bool:
    if isinstance(domain, (Interval, Rectangle)):
        return True
    return isinstance(domain, TimeExtruded) and isinstance(domain.spatial, (Interval, Rectangle))


def sample_interior(domain: Domain, n, strategy: str = "grid") -> np.ndarray:
    """Deterministic interior points, strictly inside the domain.

    n may be an int budget or a per-axis tuple (grid strategy only).
    Grid counts from an int budget satisfy count <= n.
    """
    d = dimension(domain)
    lo, hi = bounding_box(domain)
    if np.any(hi - lo <= 0):
        raise ValueError("degenerate domain")
    if strategy == "grid":
        if isinstance(n, (tuple, list, np.ndarray)):
            counts = tuple(int(k) for k in n)
            if len(counts) != d or any(k < 1 for k in counts):
                raise ValueError(f"per-axis counts {counts} invalid for dim {d}")
        else:
            if int(n) < 1:
                raise ValueError("need n >= 1")
            counts = (max(1, int(float(n) ** (1.0 / d))),) * d
        pts = _open_lattice(lo, hi, counts)
        if not _is_box(domain):
            pts = pts[_strictly_inside(domain, pts)]
        return pts
    if strategy == "halton":
        n = int(n)
        if n < 1:
            raise ValueError("need n >= 1")
        accepted = []
        start, total = 1, 0
        while total < n:
            batch = max(64, 2 * (n - total))
            unit = halton_points(start, batch, d)
            start += batch
            pts = lo + unit * (hi - lo)
            keep = pts[_strictly_inside(domain, pts)]
            accepted.append(keep)
            total += keep.shape[0]
        return np.concatenate(accepted)[:n]
    raise ValueError(f"unknown strategy {strategy!r}")


def _strictly_inside(domain: Domain, pts: np.ndarray) -> np.ndarray:
    lo, hi = bounding_box(domain)
    mask = np.all((pts > lo) & (pts < hi), axis=1)
    if isinstance(domain, Polygon):
        mask &= points_in_polygon(domain, pts)
    elif isinstance(domain, TimeExtruded) and isinstance(domain.spatial, Polygon):
        mask &= points_in_polygon(domain.spatial, pts[:, :-1])
    return mask


# ---------------------------------------------------------------------------
# boundary and initial sampling

def _perimeter_points(verts: np.ndarray, n: int):
    """n arc-length-uniform points along the closed polyline, with edge tags."""
    edges = np.roll(verts, -1, axis=0) - verts
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cum[-1]
    s = (np.arange(n) + 0.5) * total / n
    tags = np.searchsorted(cum, s, side="right") - 1
    local = (s - cum[tags]) / lengths[tags]
    pts = verts[tags] + local[:, None] * edges[tags]
    return pts, tags.astype(np.int64)


def sample_boundary(domain: Domain, n: int) -> PointSet:
    """Tagged boundary points; returns a PointSet with empty interior/initial.

    Interval: the two endpoints (tags 0/1).  Rectangle/Polygon: perimeter
    placement with edge-index tags.  1D time extrusion: n/2 inclusive time
    levels per side, left/right points paired for periodic use.
    """
    empty = np.zeros((0, dimension(domain)))
    no_partner = -np.ones(0, dtype=np.int64)
    if isinstance(domain, Interval):
        if n < 2:
            raise ValueError("1D boundary needs n >= 2")
        pts = np.array([[domain.lo], [domain.hi]])
        return PointSet(empty, pts, np.array([0, 1], dtype=np.int64), -np.ones(2, dtype=np.int64), empty)
    if isinstance(domain, (Rectangle, Polygon)):
        if n < 1:
            raise ValueError("need n >= 1")
        verts = domain.vertices() if isinstance(domain, Rectangle) else domain.vertices
        pts, tags = _perimeter_points(verts, n)
        return PointSet(empty, pts, tags, -np.ones(n, dtype=np.int64), empty)
    if isinstance(domain, TimeExtruded):
        if isinstance(domain.spatial, Interval):
            if n < 2 or n % 2:
                raise ValueError("1D time-extruded boundary needs an even n >= 2")
            m = n // 2
            t = np.linspace(0.0, domain.t_final, m)
            left = np.column_stack([np.full(m, domain.spatial.lo), t])
            right = np.column_stack([np.full(m, domain.spatial.hi), t])
            pts = np.vstack([left, right])
            tags = np.concatenate([np.zeros(m, dtype=np.int64), np.ones(m, dtype=np.int64)])
            partner = np.concatenate([np.arange(m) + m, np.arange(m)]).astype(np.int64)
            return PointSet(empty, pts, tags, partner, empty)
        # spatial perimeter x inclusive time levels
        n_t = max(2, int(round(np.sqrt(n / 4.0))))
        n_sp = n // n_t
        if n_sp < 1:
            raise ValueError(f"boundary budget {n} too small")
        sp = sample_boundary(domain.spatial, n_sp)
        t = np.linspace(0.0, domain.t_final, n_t)
        pts = np.vstack([np.column_stack([sp.boundary, np.full(n_sp, tv)]) for tv in t])
        tags = np.tile(sp.boundary_tags, n_t)
        return PointSet(empty, pts, tags, -np.ones(pts.shape[0], dtype=np.int64), empty)
    raise TypeError(f"unknown domain {type(domain).__name__}")


def sample_initial(domain: TimeExtruded, n) -> np.ndarray:
    """Spatial open-lattice points at t = 0 exactly."""
    if not isinstance(domain, TimeExtruded):
        raise TypeError("initial points only exist for time-extruded domains")
    spatial = sample_interior(domain.spatial, n, "grid")
    return np.column_stack([spatial, np.zeros(spatial.shape[0])])


def sample_points(domain: Domain, n_interior, n_boundary: int, n_initial=0, strategy: str = "grid") -> PointSet:
    """Full tagged point set for a problem: interior + boundary (+ initial)."""
    interior = sample_interior(domain, n_interior, strategy)
    if interior.shape[0] == 0:
        raise ValueError("no interior points accepted")
    bnd = sample_boundary(domain, n_boundary)
    initial = bnd.initial
    if isinstance(domain, TimeExtruded) and n_initial:
        initial = sample_initial(domain, n_initial)
    return PointSet(interior, bnd.boundary, bnd.boundary_tags, bnd.boundary_partner, initial)


# ---------------------------------------------------------------------------
# polygon file ingestion and built-in shapes

def load_polygon(path, rescale: bool = False) -> Polygon:
    """Load a polygon from CSV (one `x,y` per line, no header, implicit closure).

    With rescale, the bounding box is affinely mapped so the longer side
    spans [0, 1] and the shorter side is centered, preserving aspect ratio.
    """
    verts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'x,y', got {line!r}")
            try:
                verts.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: could not parse {line!r}") from None
    if len(verts) < 3:
        raise ValueError(f"{path}: polygon needs at least 3 vertices, found {len(verts)}")
    verts = np.asarray(verts)
    if rescale:
        lo, hi = verts.min(axis=0), verts.max(axis=0)
        span = hi - lo
        scale = 1.0 / span.max()
        verts = (verts - lo) * scale
        short = np.argmin(span)
        verts[:, short] += 0.5 * (1.0 - span[short] * scale)
    return Polygon(verts)


def star_polygon(n_tips: int = 5, outer_radius: float = 1.0, inner_radius: float = 0.5) -> Polygon:
    """Star-shaped test domain: alternating outer/inner vertices, one tip on +y."""
    angles = np.pi / 2 + np.arange(2 * n_tips) * np.pi / n_tips
    radii = np.where(np.arange(2 * n_tips) % 2 == 0, outer_radius, inner_radius)
    return Polygon(np.column_stack([radii * np.cos(angles), radii * np.sin(angles)]))


def bundled_polygon_path() -> str:
    """Path of the complex polygon outline that ships with the package."""
    return str(importlib.resources.files("pielm").joinpath("data/complex_polygon.csv"))
