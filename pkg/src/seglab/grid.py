"""Masked rectangular grids, discrete operators, and quadrature.

Node (ix, iy) sits at (ox + ix*hx, oy + iy*hy); arrays are indexed
[iy, ix].  Every node carries a mask flag: EXTERIOR nodes are outside the
computational domain and hold the value 0, BOUNDARY nodes carry Dirichlet
data, INTERIOR nodes are unknowns of the 5-point stencil.

Masks are built so that no interior node has an exterior node among its
8 neighbours.  This makes the cell-based quadrature used by the energy
exactly consistent with the 5-point stencil: every lattice edge incident
to an interior node is shared by two quadrature cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EXTERIOR = 0
BOUNDARY = 1
INTERIOR = 2


class DomainError(ValueError):
    """A ball/circle/point leaves the masked domain."""


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    hx: float
    hy: float
    origin: tuple[float, float]
    mask: np.ndarray  # (ny, nx) uint8 of {EXTERIOR, BOUNDARY, INTERIOR}

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2x2 nodes")
        if self.hx <= 0 or self.hy <= 0:
            raise ValueError("grid spacings must be positive")
        m = np.asarray(self.mask, dtype=np.uint8)
        if m.shape != (self.ny, self.nx):
            raise ValueError(f"mask shape {m.shape} != (ny={self.ny}, nx={self.nx})")
        object.__setattr__(self, "mask", m)
        _check_mask(m)

    # -- coordinates -------------------------------------------------

    @property
    def xs(self) -> np.ndarray:
        return self.origin[0] + self.hx * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self.origin[1] + self.hy * np.arange(self.ny)

    def node_xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of node coordinates, shape (ny, nx) each."""
        return np.meshgrid(self.xs, self.ys)

    # -- masks -------------------------------------------------------

    @property
    def interior(self) -> np.ndarray:
        return self.mask == INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.mask == BOUNDARY

    @property
    def nonexterior(self) -> np.ndarray:
        return self.mask != EXTERIOR

    def cell_included(self, region: np.ndarray | None = None) -> np.ndarray:
        """Cells (ny-1, nx-1) whose 4 corner nodes all lie in `region`.

        `region` defaults to the non-exterior node set.
        """
        r = self.nonexterior if region is None else np.asarray(region, bool)
        return r[:-1, :-1] & r[:-1, 1:] & r[1:, :-1] & r[1:, 1:]

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        cx = self.origin[0] + self.hx * (np.arange(self.nx - 1) + 0.5)
        cy = self.origin[1] + self.hy * (np.arange(self.ny - 1) + 0.5)
        return np.meshgrid(cx, cy)

    def boundary_nodes(self) -> np.ndarray:
        """Boundary node indices as an (nb, 2) array of (iy, ix), row-major."""
        iy, ix = np.nonzero(self.boundary)
        return np.stack([iy, ix], axis=1)

    def cell_area(self) -> float:
        return self.hx * self.hy


def _check_mask(mask: np.ndarray) -> None:
    interior = mask == INTERIOR
    if not interior.any():
        raise ValueError("mask has no interior nodes")
    # interior nodes may not touch the array edge and their 4 neighbours
    # must be non-exterior
    if interior[0, :].any() or interior[-1, :].any() \
            or interior[:, 0].any() or interior[:, -1].any():
        raise ValueError("interior node on the array frontier")
    ok = np.ones_like(interior)
    ne = mask != EXTERIOR
    ok[1:-1, 1:-1] = ne[:-2, 1:-1] & ne[2:, 1:-1] & ne[1:-1, :-2] & ne[1:-1, 2:]
    bad = interior & ~ok
    if bad.any():
        iy, ix = np.argwhere(bad)[0]
        raise ValueError(f"interior node ({ix}, {iy}) touches an exterior node")


@dataclass
class Field:
    """One scalar grid function; exterior values are identically 0."""

    grid: Grid
    values: np.ndarray = field(default=None)  # (ny, nx) float64

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros((self.grid.ny, self.grid.nx))
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.shape != (self.grid.ny, self.grid.nx):
            raise ValueError("field shape does not match grid")
        v[~self.grid.nonexterior] = 0.0
        self.values = v

    def check_finite(self) -> None:
        bad = ~np.isfinite(self.values) & self.grid.nonexterior
        if bad.any():
            iy, ix = np.argwhere(bad)[0]
            raise ValueError(f"non-finite field value at node (ix={ix}, iy={iy})")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        x, y = grid.node_xy()
        v = np.asarray(fn(x, y), dtype=float)
        v = np.where(grid.nonexterior, v, 0.0)
        return cls(grid, v)


@dataclass(frozen=True)
class BallSpec:
    center: tuple[float, float]
    radius: float
    delta: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        if self.delta < 0:
            raise ValueError("regularization delta must be nonnegative")


# ---------------------------------------------------------------------------
# domain presets


def square_grid(n: int, size: float = 1.0, origin: tuple[float, float] = (0.0, 0.0)) -> Grid:
    """Uniform grid on a square; frontier nodes are boundary, rest interior."""
    h = size / (n - 1)
    mask = np.full((n, n), INTERIOR, dtype=np.uint8)
    mask[0, :] = mask[-1, :] = BOUNDARY
    mask[:, 0] = mask[:, -1] = BOUNDARY
    return Grid(n, n, h, h, origin, mask)


def disk_grid(n: int, radius: float = 0.45,
              center: tuple[float, float] = (0.5, 0.5)) -> Grid:
    """Masked disk inside the unit square.

    Inside nodes whose full 8-neighbourhood is inside the disk are
    interior; the remaining inside nodes form the boundary staircase.
    """
    h = 1.0 / (n - 1)
    xs = h * np.arange(n)
    x, y = np.meshgrid(xs, xs)
    inside = (x - center[0]) ** 2 + (y - center[1]) ** 2 <= radius ** 2
    core = np.zeros_like(inside)
    core[1:-1, 1:-1] = inside[1:-1, 1:-1]
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            core[1:-1, 1:-1] &= inside[1 + dy:n - 1 + dy, 1 + dx:n - 1 + dx]
    mask = np.where(core, INTERIOR, np.where(inside, BOUNDARY, EXTERIOR))
    return Grid(n, n, h, h, (0.0, 0.0), mask.astype(np.uint8))


def make_domain(preset: str, n: int) -> Grid:
    if preset == "square":
        return square_grid(n)
    if preset == "disk":
        return disk_grid(n)
    raise ValueError(f"unknown domain preset {preset!r} (valid: square, disk)")


# ---------------------------------------------------------------------------
# discrete operators


def apply_laplacian(f: Field) -> Field:
    """5-point Laplacian at interior nodes, 0 elsewhere."""
    f.check_finite()
    g = f.grid
    v = f.values
    out = np.zeros_like(v)
    inner = v[1:-1, 1:-1]
    lap = (v[1:-1, 2:] + v[1:-1, :-2] - 2.0 * inner) / g.hx ** 2 \
        + (v[2:, 1:-1] + v[:-2, 1:-1] - 2.0 * inner) / g.hy ** 2
    core = g.interior[1:-1, 1:-1]
    out[1:-1, 1:-1] = np.where(core, lap, 0.0)
    return Field(g, out)


def dirichlet_energy(f: Field, region: np.ndarray | None = None) -> float:
    """Sum of |grad f|^2 over cells inside `region` (node boolean array).

    Per cell, the squared x-gradient is the average of the two x-edge
    forward differences (same in y), weighted by the cell area.  This is
    the edge sum with trapezoidal weights in the transverse direction.
    """
    g = f.grid
    cells = g.cell_included(region)
    if not cells.any():
        import warnings

        warnings.warn("dirichlet_energy: empty region", stacklevel=2)
        return 0.0
    v = f.values
    dx = (v[:, 1:] - v[:, :-1]) / g.hx      # (ny, nx-1), x-edges
    dy = (v[1:, :] - v[:-1, :]) / g.hy      # (ny-1, nx), y-edges
    gx2 = 0.5 * (dx[:-1, :] ** 2 + dx[1:, :] ** 2)   # per cell
    gy2 = 0.5 * (dy[:, :-1] ** 2 + dy[:, 1:] ** 2)
    return float(np.sum((gx2 + gy2)[cells]) * g.cell_area())


def _require_ball_inside(g: Grid, ball: BallSpec) -> np.ndarray:
    """Cells with center inside the ball; error if any such cell is cut
    by the domain mask or the ball exits the bounding box."""
    x0, y0 = ball.center
    r = ball.radius
    xs, ys = g.xs, g.ys
    if x0 - r < xs[0] - 1e-12 or x0 + r > xs[-1] + 1e-12 \
            or y0 - r < ys[0] - 1e-12 or y0 + r > ys[-1] + 1e-12:
        raise DomainError(
            f"ball B_{r}(({x0}, {y0})) exits the grid bounding box "
            f"[{xs[0]}, {xs[-1]}] x [{ys[0]}, {ys[-1]}]")
    cx, cy = g.cell_centers()
    inside = (cx - x0) ** 2 + (cy - y0) ** 2 <= r * r
    bad = inside & ~g.cell_included()
    if bad.any():
        iy, ix = np.argwhere(bad)[0]
        raise DomainError(
            f"ball B_{r}(({x0}, {y0})) covers masked-out cell (ix={ix}, iy={iy})")
    return inside


def integrate_ball(f: Field, ball: BallSpec, weight_mode: str = "unit",
                   ndim: int = 2) -> float:
    """Midpoint-rule integral of f (times an optional radial weight) over
    the cells whose centers lie in the ball.

    weight_mode "unit" integrates f itself; "acf" uses the kernel
    |x-x0|^(2-N) regularized at scale `ball.delta` (identically 1 for
    N = 2).
    """
    g = f.grid
    inside = _require_ball_inside(g, ball)
    v = f.values
    center_vals = 0.25 * (v[:-1, :-1] + v[:-1, 1:] + v[1:, :-1] + v[1:, 1:])
    if weight_mode == "unit":
        w = 1.0
    elif weight_mode == "acf":
        if ndim == 2:
            w = 1.0
        else:
            from .sphere import phi_delta

            delta = ball.delta if ball.delta > 0 else 2.0 * max(g.hx, g.hy)
            cx, cy = g.cell_centers()
            dist = np.hypot(cx - ball.center[0], cy - ball.center[1])
            w = phi_delta(dist, delta, ndim)
    else:
        raise ValueError(f"unknown weight_mode {weight_mode!r}")
    return float(np.sum((center_vals * w)[inside]) * g.cell_area())


def integrate_circle(f: Field, center: tuple[float, float], r: float,
                     m: int = 720) -> float:
    """Trapezoid rule over m uniform angles; integrand bilinear-sampled."""
    if m < 16:
        raise ValueError("need at least 16 circle samples")
    theta = 2.0 * math.pi * np.arange(m) / m
    px = center[0] + r * np.cos(theta)
    py = center[1] + r * np.sin(theta)
    vals = interpolate(f, px, py)
    return float(2.0 * math.pi * r / m * np.sum(vals))


def interpolate(f: Field, px, py):
    """Bilinear interpolation at point(s) (px, py); exact on bilinears.

    All four enclosing nodes must be non-exterior.
    """
    g = f.grid
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    scalar = px.ndim == 0
    px, py = np.atleast_1d(px), np.atleast_1d(py)
    tx = (px - g.origin[0]) / g.hx
    ty = (py - g.origin[1]) / g.hy
    eps = 1e-12
    if (tx < -eps).any() or (tx > g.nx - 1 + eps).any() \
            or (ty < -eps).any() or (ty > g.ny - 1 + eps).any():
        k = int(np.argmax((tx < -eps) | (tx > g.nx - 1 + eps)
                          | (ty < -eps) | (ty > g.ny - 1 + eps)))
        raise DomainError(f"point ({px[k]}, {py[k]}) outside the grid")
    ix = np.clip(np.floor(tx).astype(int), 0, g.nx - 2)
    iy = np.clip(np.floor(ty).astype(int), 0, g.ny - 2)
    fx = tx - ix
    fy = ty - iy
    ne = g.nonexterior
    corners_ok = ne[iy, ix] & ne[iy, ix + 1] & ne[iy + 1, ix] & ne[iy + 1, ix + 1]
    if not corners_ok.all():
        k = int(np.argmin(corners_ok))
        raise DomainError(f"point ({px[k]}, {py[k]}) in a masked-out cell")
    v = f.values
    out = (v[iy, ix] * (1 - fx) * (1 - fy) + v[iy, ix + 1] * fx * (1 - fy)
           + v[iy + 1, ix] * (1 - fx) * fy + v[iy + 1, ix + 1] * fx * fy)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# gradient helpers (node-painted; used by the monotonicity diagnostics)


def gradient_squared(f: Field) -> Field:
    """|grad f|^2 painted at nodes.

    Per direction, the squared slope is the average of the squared
    one-sided differences on the two incident edges (one-sided at the
    ends).  Averaging the squares, not the slopes, keeps the integral of
    kinked profiles (e.g. x^+) exact across the kink.
    """
    g = f.grid
    v = f.values
    ne = g.nonexterior
    out = np.zeros_like(v)
    for axis, h in ((1, g.hx), (0, g.hy)):
        d = np.diff(v, axis=axis) / h            # edge slopes
        edge_ok = np.logical_and(np.take(ne, range(0, v.shape[axis] - 1), axis=axis),
                                 np.take(ne, range(1, v.shape[axis]), axis=axis))
        d2 = np.where(edge_ok, d * d, 0.0)
        lo = np.zeros_like(v)   # slope^2 of the edge on the low side
        hi = np.zeros_like(v)
        has_lo = np.zeros(v.shape, dtype=bool)
        has_hi = np.zeros(v.shape, dtype=bool)
        if axis == 1:
            hi[:, :-1] = d2
            has_hi[:, :-1] = edge_ok
            lo[:, 1:] = d2
            has_lo[:, 1:] = edge_ok
        else:
            hi[:-1, :] = d2
            has_hi[:-1, :] = edge_ok
            lo[1:, :] = d2
            has_lo[1:, :] = edge_ok
        cnt = has_lo.astype(float) + has_hi.astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            avg = np.where(cnt > 0, (lo + hi) / np.maximum(cnt, 1.0), 0.0)
        out += avg
    out[~ne] = 0.0
    return Field(g, out)


def gradient(f: Field) -> tuple[Field, Field]:
    """(df/dx, df/dy) at nodes: central differences where both neighbours
    are non-exterior, one-sided otherwise, 0 at exterior nodes."""
    g = f.grid
    v = f.values
    ne = g.nonexterior
    out = []
    for axis, h in ((1, g.hx), (0, g.hy)):
        lo_ok = np.zeros(v.shape, dtype=bool)
        hi_ok = np.zeros(v.shape, dtype=bool)
        v_lo = np.zeros_like(v)
        v_hi = np.zeros_like(v)
        if axis == 1:
            lo_ok[:, 1:] = ne[:, :-1]
            hi_ok[:, :-1] = ne[:, 1:]
            v_lo[:, 1:] = v[:, :-1]
            v_hi[:, :-1] = v[:, 1:]
        else:
            lo_ok[1:, :] = ne[:-1, :]
            hi_ok[:-1, :] = ne[1:, :]
            v_lo[1:, :] = v[:-1, :]
            v_hi[:-1, :] = v[1:, :]
        central = (v_hi - v_lo) / (2.0 * h)
        fwd = (v_hi - v) / h
        bwd = (v - v_lo) / h
        d = np.where(lo_ok & hi_ok, central,
                     np.where(hi_ok, fwd, np.where(lo_ok, bwd, 0.0)))
        d = np.where(ne, d, 0.0)
        out.append(Field(g, d))
    return out[0], out[1]
