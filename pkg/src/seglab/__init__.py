"""seglab: a numerical laboratory for ternary segregation energies.

Three densities on a planar grid minimize the sum of their Dirichlet
energies plus a competition term beta * integral of u1^2 u2^2 u3^2,
subject to partially segregated Dirichlet traces.  The package solves
the minimization by warm-started continuation in beta, and probes the
resulting states with free-boundary diagnostics: an
Alt-Caffarelli-Friedman-type monotonicity scan, a spherical-cap
eigenvalue bound, a Pohozaev-type identity residual, Holder seminorms,
overlap measures, and an exponential decay probe.  A companion exact
search solves the spherical arc-partition problem that calibrates the
monotonicity exponent.
"""

from .boundary import (
    BoundaryTriplet,
    SegregationCertificate,
    boundary_thetas,
    make_preset,
    validate_partial_segregation,
)
from .diagnostics import (
    ACFReport,
    CircleTrace,
    DecayReport,
    HolderReport,
    OverlapReport,
    acf_lower_bound_check,
    acf_perturbed_scan,
    acf_scan,
    boundary_distance,
    circle_trace,
    decay_probe,
    default_radii,
    holder_seminorm,
    lambda_arcs,
    overlap_measures,
    pohozaev_residual,
)
# note: the energy *function* is not re-exported here because it would
# shadow the seglab.energy submodule attribute; use seglab.energy.energy
from .energy import (
    ContinuationSchedule,
    EnergyBreakdown,
    InvariantViolation,
    MinimizeReport,
    NonConvergenceError,
    StageResult,
    TripletState,
    check_state_invariants,
    competitor_bound_gap,
    continuation,
    initial_state,
    interaction_energy,
    minimize,
    pde_residual,
    product_integral,
    relax_component,
    segregated_competitor,
)
from .grid import (
    BallSpec,
    DomainError,
    Field,
    Grid,
    apply_laplacian,
    dirichlet_energy,
    disk_grid,
    gradient,
    gradient_squared,
    integrate_ball,
    integrate_circle,
    interpolate,
    make_domain,
    square_grid,
)
from .io import (
    CheckpointError,
    ConfigError,
    RunConfig,
    dump_field,
    load_checkpoint,
    parse_config,
)
from .sphere import (
    ArcConfig,
    InfeasibleConfig,
    SearchResult,
    arc_lambda,
    check_feasible,
    config_value,
    gamma,
    halfcap_config,
    phi_delta,
    search_alpha,
    symmetric_config,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
