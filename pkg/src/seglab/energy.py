"""Ternary segregation energy and its block-coordinate-descent minimizer.

The energy of a triplet u = (u1, u2, u3) with competition strength beta is

    E(u) = sum_i Dirichlet(u_i) + beta * integral of u1^2 u2^2 u3^2,

discretized with the cell quadratures of :mod:`seglab.grid`.  Freezing
two components, the energy is a convex quadratic in the third whose
exact minimizer solves the screened Poisson problem

    -Lap u_i + c u_i = 0,   c = beta * prod_{j != i} u_j^2 >= 0,

with the Dirichlet trace psi_i.  Each block solve is a warm-started
conjugate gradient iteration, so the energy never increases: CG descends
the same quadratic it is solving.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .boundary import BoundaryTriplet
from .grid import Field, Grid, dirichlet_energy

DEFAULT_LIN_TOL = 1e-10
DEFAULT_SWEEP_TOL = 1e-12
DEFAULT_MAX_SWEEPS = 500


class NonConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InvariantViolation(RuntimeError):
    """A state invariant (nonnegativity, descent, max principle) failed."""


@dataclass
class EnergyBreakdown:
    dirichlet: tuple[float, float, float]
    interaction: float
    total: float = field(init=False)

    def __post_init__(self):
        self.total = self.dirichlet[0] + self.dirichlet[1] + self.dirichlet[2] \
            + self.interaction


@dataclass
class TripletState:
    u: list[Field]                  # 3 fields
    beta: float
    trace: BoundaryTriplet
    sweeps: int = 0
    last_decrement: float = float("nan")
    converged: bool = False

    @property
    def grid(self) -> Grid:
        return self.u[0].grid

    def values(self) -> np.ndarray:
        return np.stack([f.values for f in self.u])

    def copy(self) -> "TripletState":
        return TripletState([f.copy() for f in self.u], self.beta, self.trace,
                            self.sweeps, self.last_decrement, self.converged)


@dataclass(frozen=True)
class ContinuationSchedule:
    betas: tuple[float, ...]
    lin_tol: float = DEFAULT_LIN_TOL
    sweep_tol: float = DEFAULT_SWEEP_TOL
    max_sweeps: int = DEFAULT_MAX_SWEEPS

    def __post_init__(self):
        b = tuple(float(x) for x in self.betas)
        if not b or any(x <= 0 for x in b):
            raise ValueError("beta schedule must be positive")
        if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValueError("beta schedule must be strictly increasing")
        object.__setattr__(self, "betas", b)


# ---------------------------------------------------------------------------
# screened-Poisson block solver


class _BlockSolver:
    """Precomputed interior-node Laplacian and boundary coupling."""

    def __init__(self, grid: Grid):
        self.grid = grid
        ny, nx = grid.ny, grid.nx
        idx = -np.ones((ny, nx), dtype=np.int64)
        iy, ix = np.nonzero(grid.interior)
        n = len(iy)
        idx[iy, ix] = np.arange(n)
        self.n = n
        self.iy, self.ix = iy, ix
        biy, bix = np.nonzero(grid.boundary)
        bidx = -np.ones((ny, nx), dtype=np.int64)
        bidx[biy, bix] = np.arange(len(biy))
        self.biy, self.bix = biy, bix

        rows, cols, vals = [], [], []
        brows, bcols, bvals = [], [], []
        diag = np.full(n, 2.0 / grid.hx ** 2 + 2.0 / grid.hy ** 2)
        for dy, dx, w in ((0, 1, 1.0 / grid.hx ** 2), (0, -1, 1.0 / grid.hx ** 2),
                          (1, 0, 1.0 / grid.hy ** 2), (-1, 0, 1.0 / grid.hy ** 2)):
            jy, jx = iy + dy, ix + dx
            nb = idx[jy, jx]
            is_int = nb >= 0
            rows.append(np.arange(n)[is_int])
            cols.append(nb[is_int])
            vals.append(np.full(is_int.sum(), -w))
            nbb = bidx[jy, jx]
            is_bnd = nbb >= 0
            brows.append(np.arange(n)[is_bnd])
            bcols.append(nbb[is_bnd])
            bvals.append(np.full(is_bnd.sum(), w))
        rows.append(np.arange(n))
        cols.append(np.arange(n))
        vals.append(diag)
        self.lap = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n))
        self.bnd = sp.csr_matrix(
            (np.concatenate(bvals), (np.concatenate(brows), np.concatenate(bcols))),
            shape=(n, len(biy)))
        # map trace storage order (row-major boundary nodes) to biy/bix order:
        # both are row-major nonzero scans, so they coincide.

    def solve(self, c_int: np.ndarray, psi_b: np.ndarray, x0: np.ndarray,
              lin_tol: float, max_iter: int | None = None) -> np.ndarray:
        b = self.bnd @ psi_b
        bnorm = float(np.linalg.norm(b))
        if bnorm == 0.0:
            return np.zeros(self.n)
        A = self.lap + sp.diags(c_int)
        dinv = 1.0 / (A.diagonal())
        M = spla.LinearOperator((self.n, self.n), matvec=lambda v: dinv * v)
        maxiter = max_iter if max_iter is not None else max(2000, 20 * int(np.sqrt(self.n)) * 10)
        x, info = spla.cg(A, b, x0=x0, rtol=lin_tol, atol=0.0, M=M, maxiter=maxiter)
        if info != 0:
            res = float(np.linalg.norm(b - A @ x) / bnorm)
            raise NonConvergenceError(
                f"screened-Poisson CG stalled at relative residual {res:.3e} "
                f"(target {lin_tol:.1e}, {maxiter} iterations)", residual=res)
        # clamp solver noise below zero: the exact solution is nonnegative
        # (M-matrix, nonnegative data) and clamping cannot increase the
        # block quadratic (off-diagonals <= 0, disjoint +/- supports)
        return np.maximum(x, 0.0)


_solver_cache: dict[int, _BlockSolver] = {}


def _solver_for(grid: Grid) -> _BlockSolver:
    key = id(grid)
    s = _solver_cache.get(key)
    if s is None or s.grid is not grid:
        s = _BlockSolver(grid)
        _solver_cache[key] = s
    return s


# ---------------------------------------------------------------------------
# energy


def interaction_energy(u: list[Field], beta: float) -> float:
    """beta * cell-midpoint integral of u1^2 u2^2 u3^2 (4-corner average
    of the product, cells with all corners non-exterior)."""
    g = u[0].grid
    prod = u[0].values ** 2 * u[1].values ** 2 * u[2].values ** 2
    center = 0.25 * (prod[:-1, :-1] + prod[:-1, 1:] + prod[1:, :-1] + prod[1:, 1:])
    cells = g.cell_included()
    return float(beta * np.sum(center[cells]) * g.cell_area())


def product_integral(u: list[Field]) -> float:
    """Integral of u1^2 u2^2 u3^2 (interaction term without the beta
    weight).  For minimizers this is non-increasing in beta: it is the
    derivative of the concave map beta -> min J_beta."""
    return interaction_energy(u, 1.0)


def energy(s: TripletState) -> EnergyBreakdown:
    d = tuple(dirichlet_energy(f) for f in s.u)
    return EnergyBreakdown(dirichlet=d, interaction=interaction_energy(s.u, s.beta))


# ---------------------------------------------------------------------------
# relaxation


def initial_state(grid: Grid, trace: BoundaryTriplet, beta: float,
                  lin_tol: float = DEFAULT_LIN_TOL) -> TripletState:
    """Admissible starting point: discrete harmonic extension of each trace."""
    fields = []
    solver = _solver_for(grid)
    for i in range(3):
        v = trace.component_grid_values(i)
        x = solver.solve(np.zeros(solver.n), trace.values[i],
                         np.zeros(solver.n), lin_tol)
        v[solver.iy, solver.ix] = x
        fields.append(Field(grid, v))
    return TripletState(fields, beta, trace)


def relax_component(s: TripletState, i: int,
                    lin_tol: float = DEFAULT_LIN_TOL) -> TripletState:
    """Exact block minimization in component i (others frozen)."""
    out = s.copy()
    _relax_inplace(out, i, lin_tol)
    return out


def _relax_inplace(s: TripletState, i: int, lin_tol: float) -> None:
    g = s.grid
    solver = _solver_for(g)
    others = [j for j in range(3) if j != i]
    c = s.beta * s.u[others[0]].values ** 2 * s.u[others[1]].values ** 2
    c_int = c[solver.iy, solver.ix]
    x0 = s.u[i].values[solver.iy, solver.ix]
    x = solver.solve(c_int, s.trace.values[i], x0, lin_tol)
    v = s.trace.component_grid_values(i)
    v[solver.iy, solver.ix] = x
    s.u[i] = Field(g, v)
    floor = -1e-12 * max(s.trace.sup_norm(), 1.0)
    if float(s.u[i].values.min()) < floor:
        raise InvariantViolation(
            f"component {i + 1} dropped below {floor:.1e} after relaxation")


@dataclass
class MinimizeReport:
    energies: list[float]
    sweeps: int
    converged: bool
    final: EnergyBreakdown = None
    residuals: tuple[float, float, float] = None


def minimize(s: TripletState, sweep_tol: float = DEFAULT_SWEEP_TOL,
             max_sweeps: int = DEFAULT_MAX_SWEEPS,
             lin_tol: float = DEFAULT_LIN_TOL) -> tuple[TripletState, MinimizeReport]:
    """Cyclic block relaxation until the per-sweep energy decrement is
    below sweep_tol * max(1, |total|)."""
    state = s.copy()
    e = energy(state).total
    energies = [e]
    converged = False
    for sweep in range(1, max_sweeps + 1):
        for i in range(3):
            _relax_inplace(state, i, lin_tol)
        e_new = energy(state).total
        if e_new > e + 1e-13 * max(1.0, abs(e)):
            raise InvariantViolation(
                f"energy increased across sweep {sweep}: {e!r} -> {e_new!r}")
        energies.append(e_new)
        state.sweeps = sweep
        state.last_decrement = e - e_new
        if e - e_new <= sweep_tol * max(1.0, abs(e_new)):
            converged = True
            e = e_new
            break
        e = e_new
    state.converged = converged
    report = MinimizeReport(energies=energies, sweeps=state.sweeps,
                            converged=converged, final=energy(state),
                            residuals=pde_residual(state))
    return state, report


def pde_residual(s: TripletState) -> tuple[float, float, float]:
    """Scaled sup-norm residual of the discrete system per component."""
    from .grid import apply_laplacian

    umax = float(max(f.values.max(initial=0.0) for f in s.u))
    scale = 1.0 + s.beta * umax ** 3
    out = []
    for i in range(3):
        others = [j for j in range(3) if j != i]
        rhs = s.beta * s.u[i].values \
            * s.u[others[0]].values ** 2 * s.u[others[1]].values ** 2
        lap = apply_laplacian(s.u[i]).values
        r = np.abs(lap - rhs)[s.grid.interior]
        out.append(float(r.max(initial=0.0) / scale))
    return tuple(out)


def check_state_invariants(s: TripletState, tol_mp: float = 1e-10) -> None:
    """Nonnegativity, boundary trace match, maximum principle."""
    psi_max = s.trace.sup_norm()
    floor = -1e-12 * max(psi_max, 1.0)
    for i, f in enumerate(s.u):
        f.check_finite()
        if float(f.values.min()) < floor:
            raise InvariantViolation(f"component {i + 1} negative beyond {floor:.1e}")
        traced = f.values[s.trace.nodes[:, 0], s.trace.nodes[:, 1]]
        if not np.array_equal(traced, s.trace.values[i]):
            raise InvariantViolation(f"component {i + 1} boundary trace mismatch")
        ci_max = float(s.trace.values[i].max(initial=0.0))
        if float(f.values.max()) > ci_max + tol_mp:
            raise InvariantViolation(
                f"component {i + 1} exceeds its boundary maximum "
                f"({float(f.values.max())!r} > {ci_max!r} + {tol_mp:.1e})")


def segregated_competitor(s: TripletState) -> list[Field]:
    """Exactly segregated admissible triplet: wherever all three
    components are positive, the smallest one is zeroed out.  Boundary
    traces are preserved when the trace itself is exactly segregated."""
    vals = s.values().copy()
    all_pos = (vals > 0).all(axis=0)
    smallest = np.argmin(vals, axis=0)
    for i in range(3):
        vals[i][all_pos & (smallest == i)] = 0.0
    return [Field(s.grid, v) for v in vals]


def competitor_bound_gap(s: TripletState, competitor: list[Field]) -> float:
    """J_beta(state) - Dirichlet(competitor); <= tol by minimality when
    the competitor is exactly segregated and admissible."""
    prod = competitor[0].values * competitor[1].values * competitor[2].values
    if np.abs(prod).max(initial=0.0) != 0.0:
        raise ValueError("competitor is not exactly segregated")
    d = sum(dirichlet_energy(f) for f in competitor)
    return energy(s).total - d


@dataclass
class StageResult:
    beta: float
    state: TripletState
    breakdown: EnergyBreakdown
    report: MinimizeReport
    competitor_gap: float | None = None


def continuation(schedule: ContinuationSchedule, initial: TripletState,
                 competitor: list[Field] | None = None,
                 stage_callback=None) -> list[StageResult]:
    """Warm-started solve along the increasing beta schedule.

    Each stage re-minimizes from the previous stage's state.  When a
    segregated competitor is supplied, the minimality bound
    E(state) <= Dirichlet(competitor) is asserted at every stage.
    """
    results: list[StageResult] = []
    state = initial
    for beta in schedule.betas:
        state = state.copy()
        state.beta = beta
        try:
            state, report = minimize(state, sweep_tol=schedule.sweep_tol,
                                     max_sweeps=schedule.max_sweeps,
                                     lin_tol=schedule.lin_tol)
        except NonConvergenceError:
            break
        gap = None
        if competitor is not None:
            gap = competitor_bound_gap(state, competitor)
            if gap > 1e-10:
                raise InvariantViolation(
                    f"minimality bound violated at beta={beta!r}: gap {gap!r}")
        result = StageResult(beta, state, report.final, report, gap)
        results.append(result)
        if stage_callback is not None:
            stage_callback(result)
        if not report.converged:
            break
    return results
