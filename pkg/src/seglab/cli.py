"""Command-line surface: configuration-driven runs, diagnostics on
stored states, the sphere-partition search, and report emission.

Subcommands: solve, sweep, diag {acf,pohozaev,holder,overlap,decay},
sphere, report.  Exit codes: 0 ok, 1 configuration error, 2 solver
non-convergence, 3 invariant violation.

Worker counts (--workers / SEGLAB_WORKERS) are accepted and recorded,
but execution is serial: every kernel is deterministic, so results are
byte-identical for any worker count by construction.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .boundary import make_preset, validate_partial_segregation
from .diagnostics import (
    acf_scan,
    boundary_distance,
    decay_probe,
    default_radii,
    holder_seminorm,
    overlap_measures,
    pohozaev_residual,
)
from .energy import (
    InvariantViolation,
    NonConvergenceError,
    check_state_invariants,
    initial_state,
)
from .energy import continuation as run_continuation
from .grid import DomainError, make_domain
from .io import CheckpointError, ConfigError, RunConfig, dump_field, load_checkpoint, parse_config
from .sphere import FULL_CIRCLE, search_alpha

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_UNCONVERGED = 2
EXIT_INVARIANT = 3


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(
            v if isinstance(v, str) else
            str(v) if isinstance(v, int) else _fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True,
                               default=_json_default) + "\n")


# ---------------------------------------------------------------------------
# pipeline


def _setup(cfg: RunConfig):
    grid = make_domain(cfg.domain_preset, cfg.n)
    trace = make_preset(cfg.boundary_preset, grid, **cfg.boundary_params)
    cert = validate_partial_segregation(
        trace, seg_tol=0.0 if cfg.boundary_preset != "custom" else 1e-12)
    if not cert.passed:
        raise ConfigError(
            f"boundary data violates partial segregation: product "
            f"{cert.max_product:g} at node {cert.argmax_node}")
    return grid, trace


def _solve_stages(cfg: RunConfig, out: Path, state=None):
    grid, trace = _setup(cfg)
    if state is None:
        state = initial_state(grid, trace, cfg.betas[0])
    stages = run_continuation(cfg.schedule(), state)
    for k, st in enumerate(stages):
        dump_field(out / f"stage_{k:02d}.txt", st.state)
    return grid, trace, stages


def _nu_default(cfg: RunConfig) -> float:
    return cfg.nu if cfg.nu is not None else search_alpha(cfg.sphere_k).best_value


def _stage_diagnostics(cfg: RunConfig, grid, trace, stages, out: Path) -> dict:
    """Run the selected diagnostics per stage; write per-plot CSVs and
    return the summary fragments."""
    psup = max(trace.sup_norm(), 1e-300)
    eps = 1e-2 * psup
    nu = _nu_default(cfg) if "acf" in cfg.scans else None
    summary = {"stages": []}
    cont_rows = []
    holder_rows = []
    for k, st in enumerate(stages):
        entry = {
            "beta": st.beta,
            "dirichlet": list(st.breakdown.dirichlet),
            "interaction": st.breakdown.interaction,
            "total": st.breakdown.total,
            "sweeps": st.report.sweeps,
            "converged": st.report.converged,
            "residuals": list(st.report.residuals),
        }
        if st.competitor_gap is not None:
            entry["competitor_gap"] = st.competitor_gap
        ov = overlap_measures(st.state, eps)
        entry["overlap"] = {
            "epsilon": ov.epsilon,
            "pairs": {f"{i + 1}{j + 1}": a for (i, j), a in ov.pairs.items()},
            "triple": ov.triple,
            "nodal": ov.nodal,
        }
        if "overlap" in cfg.scans:
            entry["overlap_sweep"] = [
                {"epsilon": f * psup,
                 "triple": overlap_measures(st.state, f * psup).triple}
                for f in cfg.eps_factors]
        cont_rows.append((st.beta, st.breakdown.interaction,
                          ov.pairs[(0, 1)], ov.pairs[(0, 2)], ov.pairs[(1, 2)],
                          ov.triple, ov.nodal))
        if "acf" in cfg.scans:
            counts = []
            for ci, center in enumerate(cfg.centers):
                rep = acf_scan(st.state.u, center, nu=nu, seg_tol=np.inf)
                viol_hi = {round(v[1], 15) for v in rep.violations}
                _write_csv(out / f"acf_stage_{k:02d}_c{ci}.csv",
                           "r,I1,I2,I3,Jnu,violation",
                           [(float(r), rep.I[0, a], rep.I[1, a], rep.I[2, a],
                             rep.J[a], int(round(float(r), 15) in viol_hi))
                            for a, r in enumerate(rep.radii)])
                counts.append(len(rep.violations))
            entry["acf_violations"] = counts
        if "pohozaev" in cfg.scans:
            center = cfg.centers[0]
            radii = default_radii(grid, center, 8)
            rows = [(float(r), pohozaev_residual(st.state, center, float(r)))
                    for r in radii]
            _write_csv(out / f"pohozaev_stage_{k:02d}.csv", "r,residual", rows)
            entry["pohozaev_max_residual"] = max(r for _, r in rows)
        if "holder" in cfg.scans:
            hs = [holder_seminorm(st.state.u[0], a, seed=cfg.seed).value
                  for a in cfg.holder_alphas]
            holder_rows.append((st.beta, *hs))
            entry["holder"] = dict(zip(map(str, cfg.holder_alphas), hs))
        if "decay" in cfg.scans:
            center = _decay_center(grid, st.state, eps)
            if center is None:
                entry["decay"] = {"applicable": False,
                                  "reason": "no pairwise overlap region"}
            else:
                rep = decay_probe(st.state, 2, center)
                entry["decay"] = {"applicable": rep.applicable,
                                  "reason": rep.reason, "M": rep.M,
                                  "slope": None if math.isnan(rep.slope)
                                  else rep.slope,
                                  "center": list(center)}
        summary["stages"].append(entry)
    _write_csv(out / "continuation.csv",
               "beta,interaction,pair12,pair13,pair23,triple,nodal", cont_rows)
    if holder_rows:
        _write_csv(out / "holder.csv",
                   "beta," + ",".join(f"alpha{a}" for a in cfg.holder_alphas),
                   holder_rows)
    if nu is not None:
        summary["nu"] = nu
    return summary


def _decay_center(grid, state, eps):
    """Deterministic probe center: the deepest node of the overlap of
    components 1 and 2 that keeps the probe balls inside the domain."""
    vals = state.values()
    x, y = grid.node_xy()
    score = np.minimum(vals[0], vals[1])
    mask = (vals[0] > eps) & (vals[1] > eps) & grid.interior
    h = max(grid.hx, grid.hy)
    iy, ix = np.nonzero(mask)
    if not len(iy):
        return None
    cand = sorted(zip(-score[iy, ix], iy.tolist(), ix.tolist()))
    for _, jy, jx in cand:
        c = (float(x[jy, jx]), float(y[jy, jx]))
        if boundary_distance(grid, c) > 16.0 * h:
            return c
    return None


def _run_pipeline(cfg: RunConfig, out: Path, state=None,
                  diagnostics=True) -> int:
    out.mkdir(parents=True, exist_ok=True)
    if state is not None:
        check_state_invariants(state)
    grid, trace, stages = _solve_stages(cfg, out, state)
    summary = _stage_diagnostics(cfg, grid, trace, stages, out) if diagnostics \
        else {"stages": [{
            "beta": st.beta,
            "dirichlet": list(st.breakdown.dirichlet),
            "interaction": st.breakdown.interaction,
            "total": st.breakdown.total,
            "sweeps": st.report.sweeps,
            "converged": st.report.converged,
            "residuals": list(st.report.residuals),
        } for st in stages]}
    for st in stages:
        check_state_invariants(st.state)
    code = EXIT_OK
    if len(stages) < len(cfg.betas) or not stages[-1].report.converged:
        code = EXIT_UNCONVERGED
    # the worker count is deliberately not echoed: it never affects any
    # numerical path, so artifact trees stay byte-identical across it
    summary["config"] = {
        "domain": cfg.domain_preset, "n": cfg.n,
        "boundary": cfg.boundary_preset, "betas": list(cfg.betas),
        "seed": cfg.seed,
    }
    summary["exit_code"] = code
    _write_json(out / "summary.json", summary)
    return code


# ---------------------------------------------------------------------------
# subcommands


def _cmd_solve(cfg, out, state):
    return _run_pipeline(cfg, out, state, diagnostics=False)


def _cmd_sweep(cfg, out, state):
    # sweep = continuation plus the per-stage overlap/interaction CSV
    cfg2 = cfg
    scans = tuple(s for s in cfg.scans if s == "overlap")
    cfg2.scans = scans
    return _run_pipeline(cfg2, out, state, diagnostics=True)


def _cmd_report(cfg, out, state):
    return _run_pipeline(cfg, out, state, diagnostics=True)


def _cmd_diag(cfg, out, state, which):
    out.mkdir(parents=True, exist_ok=True)
    grid, trace = _setup(cfg)
    if state is None:
        raise ConfigError("diag requires --state <checkpoint>")
    check_state_invariants(state)
    psup = max(trace.sup_norm(), 1e-300)
    eps = 1e-2 * psup
    result: dict = {"diagnostic": which, "beta": state.beta}
    if which == "acf":
        nu = _nu_default(cfg)
        rep = acf_scan(state.u, cfg.centers[0], nu=nu, seg_tol=np.inf)
        viol = {round(v[1], 15) for v in rep.violations}
        _write_csv(out / "acf.csv", "r,I1,I2,I3,Jnu,violation",
                   [(float(r), rep.I[0, a], rep.I[1, a], rep.I[2, a], rep.J[a],
                     int(round(float(r), 15) in viol))
                    for a, r in enumerate(rep.radii)])
        result.update(nu=nu, violations=len(rep.violations),
                      hypotheses_met=rep.hypotheses_met)
    elif which == "pohozaev":
        center = cfg.centers[0]
        radii = default_radii(grid, center, 8)
        rows = [(float(r), pohozaev_residual(state, center, float(r)))
                for r in radii]
        _write_csv(out / "pohozaev.csv", "r,residual", rows)
        result["max_residual"] = max(r for _, r in rows)
    elif which == "holder":
        vals = {str(a): holder_seminorm(state.u[0], a, seed=cfg.seed).value
                for a in cfg.holder_alphas}
        result["seminorms"] = vals
    elif which == "overlap":
        sweeps = []
        for f in cfg.eps_factors:
            ov = overlap_measures(state, f * psup)
            sweeps.append({"epsilon": ov.epsilon,
                           "pairs": {f"{i+1}{j+1}": a
                                     for (i, j), a in ov.pairs.items()},
                           "triple": ov.triple, "nodal": ov.nodal})
        result["overlaps"] = sweeps
    elif which == "decay":
        center = _decay_center(grid, state, eps)
        if center is None:
            result["decay"] = {"applicable": False,
                               "reason": "no pairwise overlap region"}
        else:
            rep = decay_probe(state, 2, center)
            result["decay"] = {"applicable": rep.applicable, "M": rep.M,
                               "slope": None if math.isnan(rep.slope)
                               else rep.slope,
                               "passed": rep.passed, "reason": rep.reason,
                               "center": list(center)}
    _write_json(out / f"diag_{which}.json", result)
    return EXIT_OK


def _cmd_sphere(cfg, out):
    out.mkdir(parents=True, exist_ok=True)
    res = search_alpha(cfg.sphere_k)
    trace_path = out / "sphere_trace.csv"
    _write_csv(trace_path, "phase,value",
               [(f'"{p}"', v) for p, v in res.trace])
    cfg_json = []
    for sup in res.best_config.supports:
        if sup == FULL_CIRCLE:
            cfg_json.append("full_circle")
        else:
            cfg_json.append([{"center": c, "length": ln} for c, ln in sup])
    _write_json(out / "sphere.json", {
        "k": cfg.sphere_k, "best_value": res.best_value, "config": cfg_json,
        "budget_exhausted": res.budget_exhausted,
        "trace_csv_path": trace_path.name,
    })
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _build_parser():
    p = argparse.ArgumentParser(
        prog="seglab",
        description="Ternary segregation energy laboratory.  Config keys "
        "([section] key, defaults in parentheses): [domain] preset (disk) "
        "n (129); [boundary] preset (symmetric_sine) c psi1 psi2 path; "
        "[solver] beta_schedule (1..1e6 x10) lin_tol (1e-10) sweep_tol "
        "(1e-12) max_sweeps (500); [diagnostics] scans (all) centers "
        "(0.5:0.5) nu (auto) eps_factors (1e-1,1e-2,1e-3) holder_alphas "
        "(0.5,0.75,0.9); [sphere] k (3); [output] dir (out); [run] "
        "workers (1) seed (0).")
    p.add_argument("--config", help="run configuration file")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--workers", type=int, help="worker count "
                   "(recorded; execution is serial and deterministic)")
    p.add_argument("--state", help="checkpoint to resume from / diagnose")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep", "report", "sphere"):
        sub.add_parser(name)
    pd = sub.add_parser("diag")
    pd.add_argument("which",
                    choices=("acf", "pohozaev", "holder", "overlap", "decay"))
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else RunConfig().validate()
        if args.out:
            cfg.out_dir = args.out
        workers = args.workers
        if workers is None and os.environ.get("SEGLAB_WORKERS"):
            workers = int(os.environ["SEGLAB_WORKERS"])
        if workers is not None:
            if workers < 1:
                raise ConfigError("workers must be >= 1")
            cfg.workers = workers
        out = Path(cfg.out_dir)
        state = None
        if args.state:
            grid, _ = _setup(cfg)
            state = load_checkpoint(args.state, grid)
        if args.command == "solve":
            return _cmd_solve(cfg, out, state)
        if args.command == "sweep":
            return _cmd_sweep(cfg, out, state)
        if args.command == "report":
            return _cmd_report(cfg, out, state)
        if args.command == "diag":
            return _cmd_diag(cfg, out, state, args.which)
        if args.command == "sphere":
            return _cmd_sphere(cfg, out)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, CheckpointError, DomainError, ValueError) as exc:
        print(f"seglab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"seglab: non-convergence: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    except InvariantViolation as exc:
        print(f"seglab: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
