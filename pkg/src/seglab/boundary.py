"""Lipschitz boundary traces (psi1, psi2, psi3) with the partial
segregation certificate psi1*psi2*psi3 == 0 on the boundary.

Boundary nodes are parametrized by an angle theta in [0, 2pi): the polar
angle around the disk center, or the arc-length position around the
square perimeter mapped affinely to [0, 2pi) (counterclockwise, starting
at the lower-left corner).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid

PRESETS = ("symmetric_sine", "halfcap", "two_phase", "custom")


@dataclass(frozen=True)
class SegregationCertificate:
    max_product: float
    argmax_node: tuple[int, int]  # (iy, ix)
    passed: bool
    seg_tol: float


@dataclass
class BoundaryTriplet:
    grid: Grid
    nodes: np.ndarray        # (nb, 2) of (iy, ix), row-major order
    thetas: np.ndarray       # (nb,)
    values: np.ndarray       # (3, nb), nonnegative
    preset_name: str
    parameters: dict = field(default_factory=dict)
    lipschitz_bound: float = 0.0

    def __post_init__(self):
        if (self.values < 0).any():
            k = int(np.argmin(self.values.min(axis=0)))
            raise ValueError(f"negative trace value at boundary node {k}")

    def component_grid_values(self, i: int) -> np.ndarray:
        """Trace i painted on the full grid (0 off the boundary)."""
        out = np.zeros((self.grid.ny, self.grid.nx))
        out[self.nodes[:, 0], self.nodes[:, 1]] = self.values[i]
        return out

    def sup_norm(self) -> float:
        return float(self.values.max(initial=0.0))


def boundary_thetas(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """(nodes, thetas): angle parameter of each boundary node.

    A grid is treated as a square perimeter when its boundary nodes all
    lie on the bounding rectangle frontier; otherwise the polar angle
    around the centroid of the boundary nodes is used.
    """
    nodes = grid.boundary_nodes()
    iy, ix = nodes[:, 0], nodes[:, 1]
    on_frame = (iy == 0) | (iy == grid.ny - 1) | (ix == 0) | (ix == grid.nx - 1)
    x = grid.origin[0] + grid.hx * ix
    y = grid.origin[1] + grid.hy * iy
    if on_frame.all():
        # arc length around the perimeter, counterclockwise from (x0, y0)
        x0, x1 = grid.xs[0], grid.xs[-1]
        y0, y1 = grid.ys[0], grid.ys[-1]
        lx, ly = x1 - x0, y1 - y0
        per = 2 * (lx + ly)
        s = np.empty(len(nodes))
        bottom = iy == 0
        right = (ix == grid.nx - 1) & ~bottom
        top = (iy == grid.ny - 1) & ~bottom & ~right
        left = ~bottom & ~right & ~top
        s[bottom] = x[bottom] - x0
        s[right] = lx + (y[right] - y0)
        s[top] = lx + ly + (x1 - x[top])
        s[left] = 2 * lx + ly + (y1 - y[left])
        theta = 2 * math.pi * s / per
    else:
        cx, cy = x.mean(), y.mean()
        theta = np.mod(np.arctan2(y - cy, x - cx), 2 * math.pi)
    return nodes, theta


def _estimate_lipschitz(grid: Grid, nodes: np.ndarray, thetas: np.ndarray,
                        values: np.ndarray) -> float:
    order = np.argsort(thetas)
    x = grid.origin[0] + grid.hx * nodes[order, 1]
    y = grid.origin[1] + grid.hy * nodes[order, 0]
    v = values[:, order]
    dx = np.diff(np.append(x, x[0]))
    dy = np.diff(np.append(y, y[0]))
    ds = np.hypot(dx, dy)
    dv = np.abs(np.diff(np.append(v, v[:, :1], axis=1), axis=1))
    ok = ds > 1e-14
    return float((dv[:, ok] / ds[ok]).max(initial=0.0))


def _symmetric_sine(theta: np.ndarray, k: int = 3) -> np.ndarray:
    """k traces sin(k/(2(k-1)) * phi) on offset supports of length 2pi(k-1)/k."""
    support = 2 * math.pi * (k - 1) / k
    slope = k / (2.0 * (k - 1))
    out = np.zeros((k, len(theta)))
    for i in range(k):
        phi = np.mod(theta - 2 * math.pi * i / k, 2 * math.pi)
        out[i] = np.where(phi <= support, np.sin(slope * phi), 0.0)
    return np.maximum(out, 0.0)


def make_preset(name: str, grid: Grid, **params) -> BoundaryTriplet:
    """Build a boundary triplet from a named preset.

    Presets:
      symmetric_sine : k=3 sine humps on 2/3-circle supports, offset by
                       2pi/3; every angle lies in at most two supports.
      halfcap        : psi1 = (cos t)^+, psi2 = (cos t)^-, psi3 = c.
      two_phase      : psi3 = 0; psi1/psi2 constants or callables of t.
      custom         : CSV table theta,psi1,psi2,psi3 (path=...).
    """
    nodes, theta = boundary_thetas(grid)
    if name == "symmetric_sine":
        k = int(params.get("k", 3))
        if k != 3:
            raise ValueError("symmetric_sine supports k=3 traces only")
        vals = _symmetric_sine(theta, 3)
    elif name == "halfcap":
        c = float(params.get("c", 1.0))
        if c <= 0:
            raise ValueError("halfcap needs c > 0")
        ct = np.cos(theta)
        vals = np.stack([np.maximum(ct, 0.0), np.maximum(-ct, 0.0),
                         np.full_like(ct, c)])
    elif name == "two_phase":
        p1 = params.get("psi1", 1.0)
        p2 = params.get("psi2", 1.0)
        v1 = p1(theta) if callable(p1) else np.full_like(theta, float(p1))
        v2 = p2(theta) if callable(p2) else np.full_like(theta, float(p2))
        vals = np.stack([v1, v2, np.zeros_like(theta)])
    elif name == "custom":
        path = params["path"]
        table = _read_trace_table(path)
        vals = np.stack([
            _periodic_interp(theta, table[:, 0], table[:, j]) for j in (1, 2, 3)])
    else:
        raise ValueError(
            f"unknown boundary preset {name!r} (valid: {', '.join(PRESETS)})")
    t = BoundaryTriplet(grid, nodes, theta, vals, name, dict(params))
    t.lipschitz_bound = _estimate_lipschitz(grid, nodes, theta, vals)
    return t


def _read_trace_table(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["theta", "psi1", "psi2", "psi3"]:
            raise ValueError(f"bad trace CSV header: {header}")
        rows = [[float(c) for c in row] for row in reader if row]
    table = np.asarray(rows)
    if len(table) < 2:
        raise ValueError("trace CSV needs at least two rows")
    if not (np.diff(table[:, 0]) > 0).all():
        raise ValueError("trace CSV theta column must be strictly increasing")
    return table


def _periodic_interp(theta, ts, vs):
    # wrap the table around 2pi for periodic linear interpolation
    ts2 = np.concatenate([ts, [ts[0] + 2 * math.pi]])
    vs2 = np.concatenate([vs, [vs[0]]])
    return np.interp(np.mod(theta - ts[0], 2 * math.pi) + ts[0], ts2, vs2)


def validate_partial_segregation(t: BoundaryTriplet,
                                 seg_tol: float = 0.0) -> SegregationCertificate:
    """Certificate that psi1*psi2*psi3 <= seg_tol at every boundary node."""
    prod = t.values[0] * t.values[1] * t.values[2]
    k = int(np.argmax(prod))
    worst = float(prod[k])
    return SegregationCertificate(
        max_product=worst,
        argmax_node=(int(t.nodes[k, 0]), int(t.nodes[k, 1])),
        passed=bool(worst <= seg_tol),
        seg_tol=seg_tol,
    )
