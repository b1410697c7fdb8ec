"""Spherical partition constants on the circle.

Computes the characteristic exponent gamma(t), first Dirichlet
eigenvalues of arc unions on S^1, the value of overlapping-partition
competitors (k supports whose k-fold intersection is empty), and a
numerical upper bound for the optimal partition constant

    alpha_k = inf { sum_j gamma(lambda(support_j)) }

over such configurations.  The search is an upper bound only: it
explores full circles and arcs, never arbitrary open sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

FULL_CIRCLE = "full_circle"

#: probe resolution for the feasibility certificate (half-open arc
#: membership, so ties at arc endpoints never count as overlap)
FEASIBILITY_SAMPLES = 3600


def gamma(t, N: int = 2):
    """Characteristic exponent: the positive root of g^2 + (N-2) g = t.

    gamma(t) = sqrt(((N-2)/2)^2 + t) - (N-2)/2; gamma(0) = 0 and gamma
    is strictly increasing in t.  Accepts scalars or arrays.
    """
    t = np.asarray(t, dtype=float)
    if (t < 0).any():
        raise ValueError("gamma requires t >= 0")
    if N < 2:
        raise ValueError("gamma requires dimension N >= 2")
    half = 0.5 * (N - 2)
    out = np.sqrt(half * half + t) - half
    return float(out) if out.ndim == 0 else out


def phi_delta(r, delta: float, N: int):
    """Regularized radial kernel replacing r^(2-N) near the origin.

    phi_delta(r) = (N/2) delta^(2-N) + ((2-N)/2) delta^(-N) r^2  for
    r <= delta, and r^(2-N) beyond; C^1 at r = delta, non-increasing.
    Defined for N >= 3 only (at N = 2 the weight is identically 1).
    """
    if N < 3:
        raise ValueError("phi_delta is for N >= 3; use the unit weight at N = 2")
    if delta <= 0:
        raise ValueError("phi_delta requires delta > 0")
    r = np.asarray(r, dtype=float)
    if (r < 0).any():
        raise ValueError("phi_delta requires r >= 0")
    inner = 0.5 * N * delta ** (2 - N) + 0.5 * (2 - N) * delta ** (-N) * r ** 2
    outer = np.where(r > 0, r, 1.0) ** (2 - N)
    out = np.where(r <= delta, inner, outer)
    return float(out) if out.ndim == 0 else out


def _normalize_arcs(arcs) -> tuple:
    """Canonicalize a list of (center, length) arcs: wrap centers into
    [0, 2pi), merge overlapping/touching arcs, sort by start angle.
    A union covering the whole circle collapses to FULL_CIRCLE.
    """
    spans = []
    total = 0.0
    for center, length in arcs:
        length = float(length)
        if not 0.0 < length < TWO_PI:
            raise ValueError(f"arc length must lie in (0, 2*pi), got {length}")
        start = float(np.mod(center - 0.5 * length, TWO_PI))
        spans.append((start, start + length))
        total += length
    if total >= TWO_PI:
        # may or may not cover the circle; the merge below decides
        pass
    # unroll wrap-around by duplicating each span shifted by 2pi, then
    # merging on the line and cutting back to one period
    line = sorted(spans + [(s + TWO_PI, e + TWO_PI) for s, e in spans])
    merged = []
    for s, e in line:
        if merged and s <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if any(e - s >= TWO_PI - 1e-15 for s, e in merged):
        return FULL_CIRCLE
    # keep the copies whose start lies in [0, 2pi)
    out = []
    for s, e in merged:
        if 0.0 <= s < TWO_PI:
            length = e - s
            out.append((float(np.mod(s + 0.5 * length, TWO_PI)), float(length)))
    return tuple(sorted(out))


@dataclass(frozen=True)
class ArcConfig:
    """k circle supports, each either FULL_CIRCLE or a tuple of
    (center angle, angular length) arcs.  Supports are canonicalized
    (arcs merged and sorted) on construction; every support must be
    nonempty (an empty support has value +inf and is never a useful
    competitor)."""

    supports: tuple

    def __post_init__(self):
        norm = []
        for sup in self.supports:
            if sup == FULL_CIRCLE:
                norm.append(FULL_CIRCLE)
                continue
            if len(sup) == 0:
                raise ValueError("every support must be nonempty")
            norm.append(_normalize_arcs(sup))
        object.__setattr__(self, "supports", tuple(norm))

    @property
    def k(self) -> int:
        return len(self.supports)


class InfeasibleConfig(ValueError):
    def __init__(self, angle: float):
        self.angle = angle
        super().__init__(
            f"all supports overlap at angle {angle:.6f} rad")


def arc_lambda(support) -> float:
    """First Dirichlet eigenvalue of the Laplace-Beltrami operator on an
    arc union: (pi / L_max)^2 with L_max the longest arc after merging
    (the eigenvalue of a disjoint union is the minimum over pieces).
    Full circle -> 0; empty support -> +inf.
    """
    if support == FULL_CIRCLE:
        return 0.0
    if len(support) == 0:
        return math.inf
    support = _normalize_arcs(support)
    if support == FULL_CIRCLE:
        return 0.0
    lmax = max(length for _, length in support)
    return (math.pi / lmax) ** 2


def _membership(support, thetas: np.ndarray) -> np.ndarray:
    """Half-open membership mask: theta in [start, start + length)."""
    if support == FULL_CIRCLE:
        return np.ones(len(thetas), dtype=bool)
    out = np.zeros(len(thetas), dtype=bool)
    for center, length in support:
        rel = np.mod(thetas - (center - 0.5 * length), TWO_PI)
        # half-open with a roundoff guard: probe angles landing on an
        # arc endpoint (a measure-zero tie) never count as overlap
        out |= rel < length - 1e-9
    return out


def check_feasible(c: ArcConfig, m: int = FEASIBILITY_SAMPLES) -> None:
    """Certify that no angle lies in the interior of all k supports;
    raises InfeasibleConfig carrying a violating angle otherwise.

    The coverage count is piecewise constant between arc endpoints, so
    probing the midpoint of every interval of the endpoint arrangement
    decides feasibility exactly (a uniform m-sample probe can miss
    overlaps narrower than its spacing, which an endpoint-refining
    search would silently exploit).  A uniform probe of `m` angles is
    checked as well so the certificate is never weaker than sampling.
    """
    ends = [0.0]
    for sup in c.supports:
        if sup == FULL_CIRCLE:
            continue
        for center, length in sup:
            start = float(np.mod(center - 0.5 * length, TWO_PI))
            ends += [start, float(np.mod(start + length, TWO_PI))]
    pts = np.sort(np.unique(ends))
    gaps = np.diff(np.append(pts, pts[0] + TWO_PI))
    mids = np.mod(pts + 0.5 * gaps, TWO_PI)
    probes = np.concatenate([mids[gaps > 1e-12],
                             np.arange(m) * (TWO_PI / m)])
    count = np.zeros(len(probes), dtype=int)
    for sup in c.supports:
        count += _membership(sup, probes)
    bad = np.nonzero(count >= c.k)[0]
    if len(bad):
        raise InfeasibleConfig(float(probes[bad[0]]))


def config_value(c: ArcConfig, m: int = FEASIBILITY_SAMPLES) -> float:
    """sum_j gamma(lambda(support_j)) after certifying feasibility."""
    check_feasible(c, m)
    return float(sum(gamma(arc_lambda(sup), 2) for sup in c.supports))


def symmetric_config(k: int) -> ArcConfig:
    """k arcs of length 2*pi*(k-1)/k offset by 2*pi/k; every angle lies
    in exactly k-1 supports.  Value k^2 / (2*(k-1))."""
    length = TWO_PI * (k - 1) / k
    return ArcConfig(tuple(
        ((np.mod(TWO_PI * j / k + 0.5 * length, TWO_PI), length),)
        for j in range(k)))


def halfcap_config(k: int) -> ArcConfig:
    """Two disjoint half circles plus k-2 full circles; value exactly 2
    for every k >= 2."""
    if k < 2:
        raise ValueError("halfcap_config needs k >= 2")
    sups = [((0.5 * math.pi, math.pi),), ((1.5 * math.pi, math.pi),)]
    sups += [FULL_CIRCLE] * (k - 2)
    return ArcConfig(tuple(sups))


@dataclass
class SearchResult:
    best_value: float
    best_config: ArcConfig
    trace: list = field(default_factory=list)  # (phase, value) entries
    budget_exhausted: bool = False


def _single_arc_config(fulls: int, arcs) -> ArcConfig:
    sups = [FULL_CIRCLE] * fulls + [((c, l),) for c, l in arcs]
    return ArcConfig(tuple(sups))


def _coarse_scan(k: int, fulls: int, resolution: int, trace: list):
    """Grid search over one-arc-per-component configurations with arc
    endpoints on a uniform lattice of `resolution` angles; `fulls`
    components are full circles.  Rotation invariance pins the first
    arc's start angle at 0.
    """
    m = k - fulls
    step = TWO_PI / resolution
    # arc endpoints sit on the lattice, so the coverage count is
    # piecewise constant on lattice intervals: probing the interval
    # midpoints decides feasibility exactly (open-arc interiors)
    thetas = (np.arange(resolution) + 0.5) * step
    # candidate arcs: (start index, length index >= 1), length < 2pi
    cands = [(s, l) for s in range(resolution) for l in range(1, resolution)]
    masks = np.zeros((len(cands), resolution), dtype=bool)
    for idx, (s, l) in enumerate(cands):
        rel = np.mod(thetas - s * step, TWO_PI)
        masks[idx] = rel < l * step
    values = np.array([math.pi / (l * step) for _, l in cands])
    first = [i for i, (s, _) in enumerate(cands) if s == 0]

    def to_config(idxs):
        arcs = [((cands[i][0] + 0.5 * cands[i][1]) * step, cands[i][1] * step)
                for i in idxs]
        return _single_arc_config(fulls, arcs)

    best = (math.inf, None)
    if m == 2:
        inter = masks[first].astype(np.int32) @ masks.T.astype(np.int32)
        for a_pos, a in enumerate(first):
            ok = np.nonzero(inter[a_pos] == 0)[0]
            if len(ok):
                b = ok[np.argmin(values[ok])]
                v = values[a] + values[b]
                if v < best[0]:
                    best = (v, to_config([a, b]))
    elif m == 3:
        for a in first:
            pair = masks & masks[a]
            counts = pair.astype(np.int32) @ masks.T.astype(np.int32)
            bi, ci = np.nonzero(counts == 0)
            if len(bi):
                v = values[a] + values[bi] + values[ci]
                j = int(np.argmin(v))
                if v[j] < best[0]:
                    best = (float(v[j]), to_config([a, bi[j], ci[j]]))
    else:
        # m >= 4: greedy sequential placement on the lattice (value
        # depends only on lengths; equal lengths summing to (m-1)*2pi
        # placed end-to-end are always feasible)
        l = int(resolution * (m - 1) / m)
        if 1 <= l < resolution:
            arcs = []
            pos = 0.0
            for _ in range(m):
                arcs.append((pos, l))
                pos = (pos + l) % resolution
            best = (m * math.pi / (l * step),
                    to_config([cands.index((int(s) % resolution, l))
                               for s, l in [(a, l) for a, l in arcs]]))
    if best[1] is not None:
        trace.append((f"coarse f={fulls}", best[0]))
    return best


def _refine(cfg: ArcConfig, value: float, iterations: int, probe: int,
            trace: list):
    """Coordinate descent on arc endpoints with a shrinking step."""
    step = TWO_PI / 64
    exhausted = True
    for _ in range(iterations):
        improved = False
        for ci, sup in enumerate(cfg.supports):
            if sup == FULL_CIRCLE:
                continue
            for ai in range(len(sup)):
                center, length = cfg.supports[ci][ai]
                start, end = center - 0.5 * length, center + 0.5 * length
                for ds, de in ((step, 0), (-step, 0), (0, step), (0, -step)):
                    s2, e2 = start + ds, end + de
                    if not 1e-6 < e2 - s2 < TWO_PI - 1e-9:
                        continue
                    arcs = list(cfg.supports[ci])
                    arcs[ai] = (0.5 * (s2 + e2), e2 - s2)
                    sups = list(cfg.supports)
                    sups[ci] = tuple(arcs)
                    try:
                        cand = ArcConfig(tuple(sups))
                        v = config_value(cand, probe)
                    except ValueError:
                        continue
                    if v < value - 1e-13:
                        cfg, value = cand, v
                        improved = True
        trace.append(("refine", value))
        if not improved:
            if step < 1e-7:
                exhausted = False
                break
            step *= 0.5
    return cfg, value, exhausted


def search_alpha(k: int, grid_resolution: int = 24,
                 refine_iterations: int = 60,
                 max_arcs_per_support: int = 1,
                 probe: int = FEASIBILITY_SAMPLES) -> SearchResult:
    """Numerical upper bound for alpha_k on the circle.

    Seeds the two explicit competitors (halfcap: value 2; symmetric:
    value k^2/(2(k-1))), runs a coarse lattice scan over one-arc
    configurations with 0..k-2 full circles, then refines arc endpoints
    by coordinate descent.  Returns the best value found; this is an
    upper bound on alpha_k, never a certificate of the infimum.
    Splitting an arc keeps the total length but shrinks the longest
    piece, which raises gamma(lambda), so allowing max_arcs_per_support
    > 1 only widens the feasible set without changing the optimum of
    this family; multi-arc supports are accepted but not generated.
    """
    if k < 2:
        raise ValueError("search_alpha needs k >= 2")
    if max_arcs_per_support < 1:
        raise ValueError("max_arcs_per_support must be >= 1")
    trace = []
    best_cfg = halfcap_config(k)
    best_val = config_value(best_cfg, probe)
    trace.append(("seed halfcap", best_val))
    sym_val = config_value(symmetric_config(k), probe)
    trace.append(("seed symmetric", sym_val))
    if sym_val < best_val:
        best_val, best_cfg = sym_val, symmetric_config(k)
    for fulls in range(0, k - 1):
        v, cfg = _coarse_scan(k, fulls, grid_resolution, trace)
        if cfg is not None and v < best_val:
            best_val, best_cfg = v, cfg
    best_cfg, best_val, exhausted = _refine(
        best_cfg, best_val, refine_iterations, probe, trace)
    return SearchResult(best_val, best_cfg, trace, exhausted)
