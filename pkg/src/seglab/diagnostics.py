"""Diagnostics verifying the analytical structure of computed states.

Monotonicity scans of the weighted-gradient product J_nu (plain and
perturbed), first eigenvalues of circle supports, the spherical
lower-bound identity, local Pohozaev (domain-variation) residuals,
Hoelder seminorms, overlap areas, and exponential decay probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    BallSpec,
    DomainError,
    Field,
    Grid,
    gradient,
    gradient_squared,
    integrate_ball,
    integrate_circle,
    interpolate,
)
from .sphere import gamma

TWO_PI = 2.0 * math.pi

#: default relative monotonicity tolerance per radius step; discrete
#: J_nu cannot be exactly monotone, the real check is that violations
#: vanish under grid refinement
MONO_TOL = 1e-3


# ---------------------------------------------------------------------------
# report types


@dataclass
class ACFReport:
    center: tuple[float, float]
    radii: np.ndarray               # strictly increasing
    I: np.ndarray                   # (3, nr) per-component integrals
    J: np.ndarray                   # (nr,) r^(-2 nu) * prod I
    nu: float
    violations: list                # (r_lo, r_hi, relative drop) triples
    hypotheses_met: bool = True
    perturbed: bool = False
    rbar: float | None = None       # smallest radius with no violation past it

    def __post_init__(self):
        if not (np.diff(self.radii) > 0).all():
            raise ValueError("scan radii must be strictly increasing")
        if not (np.isfinite(self.I).all() and (self.I >= 0).all()):
            raise ValueError("non-finite or negative I value in scan")
        if not (np.isfinite(self.J).all() and (self.J >= 0).all()):
            raise ValueError("non-finite or negative J value in scan")


@dataclass
class CircleTrace:
    center: tuple[float, float]
    radius: float
    thetas: np.ndarray              # (m,) uniform angles
    samples: np.ndarray             # (ncomp, m) bilinear samples
    epsilon: float                  # support threshold

    def __post_init__(self):
        if self.samples.shape[1] < 16:
            raise ValueError("circle trace needs at least 16 samples")
        if not np.isfinite(self.samples).all():
            raise ValueError("non-finite circle sample")


@dataclass
class OverlapReport:
    epsilon: float
    pairs: dict                     # {(0,1): area, (0,2): ..., (1,2): ...}
    triple: float
    nodal: float                    # area where >= 2 components < epsilon
    domain_area: float

    def __post_init__(self):
        for k, a in self.pairs.items():
            if not 0.0 <= a <= self.domain_area + 1e-12:
                raise ValueError(f"pair overlap {k} outside [0, |domain|]")
            if self.triple > a + 1e-12:
                raise ValueError("triple overlap exceeds a pairwise overlap")


@dataclass
class DecayReport:
    applicable: bool
    reason: str = ""
    M: float = 0.0
    radii: np.ndarray | None = None
    sups: np.ndarray | None = None          # sup over B_rho
    sups_double: np.ndarray | None = None   # sup over B_{2 rho}
    slope: float = math.nan
    passed: bool = False


@dataclass
class HolderReport:
    value: float
    argmax_pair: tuple              # ((x, y), (x, y))
    alpha: float
    exact: bool
    stride: int = 1
    offset: int = 0


# ---------------------------------------------------------------------------
# radii helpers


def boundary_distance(grid: Grid, x0: tuple[float, float]) -> float:
    """Distance from x0 to the nearest boundary node."""
    nodes = grid.boundary_nodes()
    x = grid.origin[0] + grid.hx * nodes[:, 1]
    y = grid.origin[1] + grid.hy * nodes[:, 0]
    return float(np.hypot(x - x0[0], y - x0[1]).min())


def default_radii(grid: Grid, x0: tuple[float, float], count: int = 32) -> np.ndarray:
    """`count` logarithmic radii in [4h, dist(x0, boundary)/2]; below 4h
    the cell quadrature is meaningless, above half the distance the ball
    leaves the domain."""
    h = max(grid.hx, grid.hy)
    rmin = 4.0 * h
    rmax = 0.5 * boundary_distance(grid, x0)
    if rmax <= rmin:
        raise DomainError(
            f"no usable scan radii around {x0}: 4h = {rmin:.3g} >= "
            f"dist/2 = {rmax:.3g}")
    return np.geomspace(rmin, rmax, count)


_TINY = 1e-300


def _flag_violations(radii, J, mono_tol):
    out = []
    for a in range(len(radii) - 1):
        drop = (J[a] - J[a + 1]) / max(J[a], _TINY)
        if drop > mono_tol:
            out.append((float(radii[a]), float(radii[a + 1]), float(drop)))
    return out


# ---------------------------------------------------------------------------
# monotonicity scans


def acf_scan(fields, x0, radii=None, nu: float = 2.0, seg_tol: float = 1e-10,
             mono_tol: float = MONO_TOL) -> ACFReport:
    """Scan J_nu(r) = r^(-2 nu) * prod_j I(u_j, x0, r) over the radii,
    with I the (weighted) Dirichlet integral of u_j on B_r(x0).

    The monotonicity statement assumes the triple product vanishes on
    the scanned ball; if max u1 u2 u3 there exceeds seg_tol the report
    is emitted anyway but marked hypotheses_met = False.
    """
    grid = fields[0].grid
    radii = default_radii(grid, x0) if radii is None else np.asarray(radii, float)
    # hypothesis: segregation on the largest scanned ball
    x, y = grid.node_xy()
    ball = np.hypot(x - x0[0], y - x0[1]) <= radii[-1]
    prod = fields[0].values * fields[1].values * fields[2].values
    hypotheses_met = bool(np.abs(prod[ball & grid.nonexterior]).max(initial=0.0)
                          <= seg_tol)
    grads = [gradient_squared(f) for f in fields]
    I = np.empty((3, len(radii)))
    for a, r in enumerate(radii):
        for j in range(3):
            I[j, a] = integrate_ball(grads[j], BallSpec(x0, float(r)),
                                     weight_mode="acf")
    J = radii ** (-2.0 * nu) * I.prod(axis=0)
    return ACFReport(tuple(x0), radii, I, J, nu,
                     _flag_violations(radii, J, mono_tol),
                     hypotheses_met=hypotheses_met)


def acf_perturbed_scan(s, x0, radii=None, nu: float = 2.0,
                       eps_exponent: float = 0.05, seg_tol: float = 1e-10,
                       mono_tol: float = MONO_TOL) -> ACFReport:
    """Perturbed scan for finite-beta states: each factor gains the
    interaction term, I~_i(r) = int_B (|grad u_i|^2 + beta u_i^2
    prod_{j != i} u_j^2), and the exponent is lowered to nu - eps.
    Reports the smallest radius past which no violation occurs (an
    r-bar candidate).
    """
    grid = s.grid
    radii = default_radii(grid, x0) if radii is None else np.asarray(radii, float)
    vals = s.values()
    integrands = []
    for i in range(3):
        others = [vals[j] ** 2 for j in range(3) if j != i]
        extra = s.beta * vals[i] ** 2 * others[0] * others[1]
        integrands.append(Field(grid, gradient_squared(s.u[i]).values + extra))
    I = np.empty((3, len(radii)))
    for a, r in enumerate(radii):
        for j in range(3):
            I[j, a] = integrate_ball(integrands[j], BallSpec(x0, float(r)),
                                     weight_mode="acf")
    J = radii ** (-2.0 * (nu - eps_exponent)) * I.prod(axis=0)
    violations = _flag_violations(radii, J, mono_tol)
    rbar = float(violations[-1][1]) if violations else float(radii[0])
    return ACFReport(tuple(x0), radii, I, J, nu - eps_exponent, violations,
                     perturbed=True, rbar=rbar)


# ---------------------------------------------------------------------------
# circle traces and arc eigenvalues


def circle_trace(fields, center, r: float, m: int = 720,
                 epsilon: float = 0.0) -> CircleTrace:
    """Bilinear samples of each field on m uniform circle angles."""
    thetas = TWO_PI * np.arange(m) / m
    px = center[0] + r * np.cos(thetas)
    py = center[1] + r * np.sin(thetas)
    samples = np.stack([interpolate(f, px, py) for f in fields])
    return CircleTrace(tuple(center), float(r), thetas, samples, float(epsilon))


def lambda_arcs(tr: CircleTrace, i: int) -> dict:
    """First Dirichlet eigenvalue of {sample_i > epsilon} on the circle.

    The super-level set is a union of arcs; arc endpoints are refined by
    linear interpolation of the threshold crossing between adjacent
    samples, so the eigenvalue (pi / L_max)^2 converges faster than the
    angular sample spacing.  Full circle -> 0, empty support -> +inf.
    """
    v = tr.samples[i]
    eps = tr.epsilon
    m = len(v)
    above = v > eps
    if above.all():
        return {"lambda": 0.0, "arcs": [(0.0, TWO_PI)]}
    if not above.any():
        return {"lambda": math.inf, "arcs": []}
    dth = TWO_PI / m
    starts = np.nonzero(above & ~np.roll(above, 1))[0]
    arcs = []
    for s in starts:
        e = s
        while above[(e + 1) % m]:
            e += 1
        # crossing before the run: between sample s-1 (<= eps) and s
        p, q = v[(s - 1) % m], v[s]
        t0 = (eps - p) / (q - p)
        th_start = (s - 1 + t0) * dth
        # crossing after the run: between sample e mod m and e+1
        p, q = v[e % m], v[(e + 1) % m]
        t1 = (p - eps) / (p - q)
        th_end = (e + t1) * dth
        length = float(np.mod(th_end - th_start, TWO_PI))
        if length == 0.0:
            length = dth  # run of a single sample with flat neighbours
        arcs.append((float(np.mod(th_start, TWO_PI)), length))
    lmax = max(length for _, length in arcs)
    return {"lambda": (math.pi / lmax) ** 2, "arcs": arcs}


def acf_lower_bound_check(f: Field, x0, r: float, m: int = 720,
                          support_eps: float | None = None,
                          check_tol: float = 1e-3) -> dict:
    """Residual of the spherical lower bound for nonnegative subharmonic
    profiles:

        int_{S_r} |grad f|^2 dsigma >= (2 gamma(lambda) / r) I(f, x0, r)

    with lambda the first eigenvalue of the circle support {f > 0}.
    Returns {lhs, rhs, residual, lambda, gamma, passed}; passes iff
    residual >= -check_tol (equality for homogeneous profiles).
    """
    if support_eps is None:
        support_eps = 1e-10 * max(float(np.abs(f.values).max()), 1e-30)
    tr = circle_trace([f], x0, r, m, epsilon=support_eps)
    lam = lambda_arcs(tr, 0)["lambda"]
    g2 = gradient_squared(f)
    lhs = integrate_circle(g2, x0, r, m)
    # the ball integral in polar form, int_0^r (int_{S_rho} ...) drho
    # (the weight is 1 in two dimensions): the cell-counting ball
    # quadrature carries an O(h) rim error that the 2 gamma / r factor
    # amplifies at small radii, while circle integrals stay O(h^2)
    rhos = np.linspace(0.0, r, 129)
    C = np.array([0.0] + [integrate_circle(g2, x0, float(rho), m)
                          for rho in rhos[1:]])
    I = float(np.trapezoid(C, rhos))
    if math.isinf(lam):
        rhs = 0.0 if I == 0.0 else math.inf
    else:
        rhs = 2.0 * gamma(lam, 2) / r * I
    residual = lhs - rhs
    return {"lhs": lhs, "rhs": rhs, "residual": residual, "lambda": lam,
            "gamma": gamma(lam, 2) if not math.isinf(lam) else math.inf,
            "passed": bool(residual >= -check_tol)}


# ---------------------------------------------------------------------------
# Pohozaev residuals


def _circle_mean(values_at_samples: np.ndarray, r: float) -> float:
    m = len(values_at_samples)
    return float(TWO_PI * r / m * values_at_samples.sum())


def pohozaev_residual(s, x0, r: float, mode: str = "finite_beta",
                      m: int = 720) -> float:
    """Scaled residual of the domain-variation identity on B_r(x0):

        r int_S (sum |grad u_i|^2 + beta prod u_j^2)
          = (N-2) int_B sum |grad u_i|^2 + N int_B beta prod u_j^2
            + 2 r int_S sum (du_i/dnu)^2

    with N = 2.  "limit" mode drops the beta terms (the identity kept by
    the segregation limit).  Scaled by r * int_S sum |grad u_i|^2.
    """
    if mode not in ("finite_beta", "limit"):
        raise ValueError(f"unknown pohozaev mode {mode!r}")
    grid = s.grid
    N = 2
    sumgrad = Field(grid, sum(gradient_squared(u).values for u in s.u))
    vals = s.values()
    triple = Field(grid, s.beta * (vals[0] * vals[1] * vals[2]) ** 2)
    thetas = TWO_PI * np.arange(m) / m
    px = x0[0] + r * np.cos(thetas)
    py = x0[1] + r * np.sin(thetas)
    # normal derivative: central-difference gradient projected radially,
    # interpolated to the circle samples
    dn2 = np.zeros(m)
    for u in s.u:
        dx, dy = gradient(u)
        dn = interpolate(dx, px, py) * np.cos(thetas) \
            + interpolate(dy, px, py) * np.sin(thetas)
        dn2 += dn * dn
    S_grad = _circle_mean(interpolate(sumgrad, px, py), r)
    S_dn2 = _circle_mean(dn2, r)
    B_grad = integrate_ball(sumgrad, BallSpec(tuple(x0), r))
    if mode == "finite_beta":
        S_triple = _circle_mean(interpolate(triple, px, py), r)
        B_triple = integrate_ball(triple, BallSpec(tuple(x0), r))
        lhs = r * (S_grad + S_triple)
        rhs = (N - 2) * B_grad + N * B_triple + 2.0 * r * S_dn2
    else:
        lhs = r * S_grad
        rhs = (N - 2) * B_grad + 2.0 * r * S_dn2
    return abs(lhs - rhs) / (r * S_grad + _TINY)


# ---------------------------------------------------------------------------
# Hoelder seminorm


def holder_seminorm(f: Field, alpha: float, region: np.ndarray | None = None,
                    max_exact: int = 4096, seed: int = 0) -> HolderReport:
    """sup over node pairs of |f(x) - f(y)| / |x - y|^alpha.

    All pairs when the region has at most `max_exact` nodes; otherwise
    the node list is strided down to at most `max_exact` nodes with a
    seed-dependent offset (stride and offset reported).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    g = f.grid
    region = g.nonexterior if region is None else np.asarray(region, bool)
    iy, ix = np.nonzero(region)
    if len(iy) < 2:
        raise ValueError("holder_seminorm needs a region with >= 2 nodes")
    stride, offset = 1, 0
    if len(iy) > max_exact:
        stride = math.ceil(len(iy) / max_exact)
        offset = seed % stride
        iy, ix = iy[offset::stride], ix[offset::stride]
    xs = g.origin[0] + g.hx * ix
    ys = g.origin[1] + g.hy * iy
    vals = f.values[iy, ix]
    best = -1.0
    arg = (0, 0)
    chunk = 256
    for a in range(0, len(vals), chunk):
        sl = slice(a, a + chunk)
        d = np.hypot(xs[sl, None] - xs[None, :], ys[sl, None] - ys[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(vals[sl, None] - vals[None, :]) / d ** alpha
        ratio[d == 0.0] = -1.0
        k = int(np.argmax(ratio))
        if ratio.flat[k] > best:
            best = float(ratio.flat[k])
            arg = (a + k // ratio.shape[1], k % ratio.shape[1])
    pair = ((float(xs[arg[0]]), float(ys[arg[0]])),
            (float(xs[arg[1]]), float(ys[arg[1]])))
    return HolderReport(max(best, 0.0), pair, alpha, stride == 1, stride, offset)


# ---------------------------------------------------------------------------
# overlaps and decay


def overlap_measures(s, eps: float) -> OverlapReport:
    """Cell-counting areas of pairwise/triple super-level overlaps
    {u_i > eps} and of the nodal set (>= 2 components below eps),
    evaluated at cell centers (4-corner means) over included cells."""
    if eps <= 0:
        raise ValueError("overlap threshold eps must be positive")
    g = s.grid
    cells = g.cell_included()
    area = g.cell_area()
    centers = []
    for u in s.u:
        v = u.values
        centers.append(0.25 * (v[:-1, :-1] + v[:-1, 1:] + v[1:, :-1] + v[1:, 1:]))
    above = [c > eps for c in centers]
    pairs = {}
    for i in range(3):
        for j in range(i + 1, 3):
            pairs[(i, j)] = float(np.sum(above[i] & above[j] & cells) * area)
    triple = float(np.sum(above[0] & above[1] & above[2] & cells) * area)
    below = sum((~a).astype(int) for a in above)
    nodal = float(np.sum((below >= 2) & cells) * area)
    return OverlapReport(eps, pairs, triple, nodal,
                         domain_area=float(cells.sum() * area))


def decay_probe(s, i: int, center, radii=None, fit_tol: float = 0.1,
                min_radii: int = 4) -> DecayReport:
    """Exponential interior decay of a locally minority component.

    With M = beta * min over B_{2 rmax}(center) of prod_{j != i} u_j^2,
    the component obeys sup_{B_rho} u_i <= C (sup_{B_{2 rho}} u_i)
    e^{-rho sqrt(M) / 2}.  The probe regresses
    log sup_{B_rho} - log sup_{B_{2 rho}} against rho sqrt(M) and passes
    when the slope is <= -1/2 + fit_tol.  Inapplicable (reported, not
    an error) when M = 0 on the ball or the component vanishes there.
    """
    g = s.grid
    x, y = g.node_xy()
    dist = np.hypot(x - center[0], y - center[1])
    if radii is None:
        h = max(g.hx, g.hy)
        rmax = 0.25 * boundary_distance(g, center)
        if rmax <= 4.0 * h:
            return DecayReport(False, reason="probe balls smaller than 4h")
        radii = np.geomspace(4.0 * h, rmax, 8)
    radii = np.asarray(radii, float)
    if len(radii) < min_radii:
        return DecayReport(False, reason="too few probe radii for a fit")
    ball2 = (dist <= 2.0 * radii[-1]) & g.nonexterior
    if not ball2.any():
        return DecayReport(False, reason="probe ball misses the domain")
    vals = s.values()
    others = np.ones_like(vals[0])
    for j in range(3):
        if j != i:
            others = others * vals[j] ** 2
    M = s.beta * float(others[ball2].min())
    if M <= 0.0:
        return DecayReport(False, reason="competitor product vanishes "
                          "on the probe ball (M = 0)", M=M)
    sups = np.array([vals[i][(dist <= r) & g.nonexterior].max(initial=0.0)
                     for r in radii])
    sups2 = np.array([vals[i][(dist <= 2 * r) & g.nonexterior].max(initial=0.0)
                      for r in radii])
    if (sups <= 0.0).any():
        return DecayReport(False, reason="component vanishes on a probe ball",
                           M=M, radii=radii, sups=sups, sups_double=sups2)
    yv = np.log(sups) - np.log(sups2)
    xv = radii * math.sqrt(M)
    slope = float(np.polyfit(xv, yv, 1)[0])
    return DecayReport(True, M=M, radii=radii, sups=sups, sups_double=sups2,
                       slope=slope, passed=bool(slope <= -0.5 + fit_tol))
