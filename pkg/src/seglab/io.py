"""Text persistence: field/state checkpoints and run configuration.

Checkpoint format (bit-exact round trip through shortest-representation
decimals):

    # segfield v1 nx=<int> ny=<int> hx=<repr> hy=<repr> ox=<repr> oy=<repr> comp=<int>
    # meta beta=<repr> sweeps=<int> total=<repr> interaction=<repr>   (states only)
    <ny rows of nx space-separated values per component,
     components separated by one blank line>

Configuration format: line-based ``key = value`` with ``[section]``
headers, ``#`` comments, unknown keys rejected with their line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import PRESETS as BOUNDARY_PRESETS
from .boundary import BoundaryTriplet, boundary_thetas
from .energy import ContinuationSchedule, TripletState, energy
from .grid import Field, Grid

MAGIC = "# segfield v1"


class CheckpointError(ValueError):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# checkpoints


def dump_field(path, obj, meta: dict | None = None) -> None:
    """Write a Field, a list of Fields, or a TripletState to `path`."""
    if isinstance(obj, TripletState):
        fields = obj.u
        e = energy(obj)
        meta = {"beta": obj.beta, "sweeps": obj.sweeps,
                "total": e.total, "interaction": e.interaction}
    elif isinstance(obj, Field):
        fields = [obj]
    else:
        fields = list(obj)
    g = fields[0].grid
    lines = [f"{MAGIC} nx={g.nx} ny={g.ny} hx={_fmt(g.hx)} hy={_fmt(g.hy)} "
             f"ox={_fmt(g.origin[0])} oy={_fmt(g.origin[1])} comp={len(fields)}"]
    if meta is not None:
        lines.append("# meta " + " ".join(
            f"{k}={v if isinstance(v, int) else _fmt(v)}"
            for k, v in meta.items()))
    for c, f in enumerate(fields):
        if c:
            lines.append("")
        for row in f.values:
            lines.append(" ".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(line: str) -> dict:
    if not line.startswith(MAGIC + " "):
        raise CheckpointError(f"bad checkpoint magic: {line[:40]!r}")
    out = {}
    for tok in line[len(MAGIC) + 1:].split():
        if "=" not in tok:
            raise CheckpointError(f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        if k in ("nx", "ny", "comp"):
            out[k] = int(v)
        elif k in ("hx", "hy", "ox", "oy"):
            out[k] = float(v)
        else:
            raise CheckpointError(f"unknown header token {tok!r}")
    for req in ("nx", "ny", "hx", "hy", "ox", "oy", "comp"):
        if req not in out:
            raise CheckpointError(f"header missing {req}=")
    return out


def _parse_meta(line: str) -> dict:
    out = {}
    for tok in line[len("# meta "):].split():
        if "=" not in tok:
            raise CheckpointError(f"malformed meta token {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = int(v) if k == "sweeps" else float(v)
    return out


def _trace_from_fields(grid: Grid, fields: list[Field]) -> BoundaryTriplet:
    """Reconstruct the boundary triplet a stored state was solved with
    (the trace values are exactly the stored boundary-node values)."""
    nodes, thetas = boundary_thetas(grid)
    vals = np.stack([f.values[nodes[:, 0], nodes[:, 1]] for f in fields])
    return BoundaryTriplet(grid, nodes, thetas, vals, "checkpoint")


def load_checkpoint(path, grid: Grid):
    """Load a checkpoint written by dump_field.

    Returns a TripletState when the file holds 3 components and a beta
    meta entry, a single Field for comp=1, and a list of Fields
    otherwise.  The caller supplies the Grid (the dump stores geometry
    but not the domain mask); geometry mismatches are rejected.
    """
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise CheckpointError(f"{path}: empty checkpoint")
    hdr = _parse_header(raw[0])
    if (hdr["nx"], hdr["ny"]) != (grid.nx, grid.ny) \
            or (hdr["hx"], hdr["hy"]) != (grid.hx, grid.hy) \
            or (hdr["ox"], hdr["oy"]) != grid.origin:
        raise CheckpointError(
            f"{path}: checkpoint geometry {hdr} does not match the grid")
    pos = 1
    meta = None
    if pos < len(raw) and raw[pos].startswith("# meta "):
        meta = _parse_meta(raw[pos])
        pos += 1
    fields = []
    for c in range(hdr["comp"]):
        if c:
            if pos >= len(raw) or raw[pos] != "":
                raise CheckpointError(
                    f"{path}: expected blank separator before component {c + 1}")
            pos += 1
        rows = []
        for j in range(hdr["ny"]):
            if pos >= len(raw):
                raise CheckpointError(
                    f"{path}: component {c + 1} truncated: expected "
                    f"{hdr['ny']} rows, found {j}")
            cells = raw[pos].split()
            if len(cells) != hdr["nx"]:
                raise CheckpointError(
                    f"{path}: line {pos + 1}: expected {hdr['nx']} values, "
                    f"found {len(cells)}")
            try:
                rows.append([float(v) for v in cells])
            except ValueError as exc:
                raise CheckpointError(f"{path}: line {pos + 1}: {exc}") from exc
            pos += 1
        fields.append(Field(grid, np.array(rows)))
    if hdr["comp"] == 3 and meta is not None and "beta" in meta:
        s = TripletState(fields, meta["beta"],
                         _trace_from_fields(grid, fields),
                         sweeps=int(meta.get("sweeps", 0)))
        return s
    if hdr["comp"] == 1:
        return fields[0]
    return fields


# ---------------------------------------------------------------------------
# run configuration


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    domain_preset: str = "disk"
    n: int = 129
    boundary_preset: str = "symmetric_sine"
    boundary_params: dict = field(default_factory=dict)
    betas: tuple = tuple(10.0 ** k for k in range(7))
    lin_tol: float = 1e-10
    sweep_tol: float = 1e-12
    max_sweeps: int = 500
    scans: tuple = ("acf", "pohozaev", "holder", "overlap", "decay")
    centers: tuple = ((0.5, 0.5),)
    nu: float | None = None            # None -> sphere search result
    eps_factors: tuple = (1e-1, 1e-2, 1e-3)
    holder_alphas: tuple = (0.5, 0.75, 0.9)
    sphere_k: int = 3
    out_dir: str = "out"
    workers: int = 1
    seed: int = 0

    def validate(self):
        if self.domain_preset not in ("square", "disk"):
            raise ConfigError(f"unknown domain preset {self.domain_preset!r}")
        if self.boundary_preset not in BOUNDARY_PRESETS:
            raise ConfigError(f"unknown boundary preset {self.boundary_preset!r}")
        if self.n < 5:
            raise ConfigError("resolution n must be >= 5")
        for name in ("lin_tol", "sweep_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be >= 1")
        if not self.betas or any(b <= 0 for b in self.betas):
            raise ConfigError("beta_schedule entries must be positive")
        if list(self.betas) != sorted(set(self.betas)):
            raise ConfigError("beta_schedule must be strictly increasing")
        bad = set(self.scans) - {"acf", "pohozaev", "holder", "overlap", "decay"}
        if bad:
            raise ConfigError(f"unknown diagnostics: {', '.join(sorted(bad))}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def schedule(self) -> ContinuationSchedule:
        return ContinuationSchedule(tuple(self.betas), self.lin_tol,
                                    self.sweep_tol, self.max_sweeps)


def _floats(v):
    return tuple(float(t) for t in v.replace(";", ",").split(",") if t.strip())


def _centers(v):
    out = []
    for part in v.split(";"):
        part = part.strip()
        if part:
            a, b = part.split(":")
            out.append((float(a), float(b)))
    return tuple(out)


# (section, key) -> attribute setter
_KEYS = {
    ("domain", "preset"): ("domain_preset", str),
    ("domain", "n"): ("n", int),
    ("boundary", "preset"): ("boundary_preset", str),
    ("solver", "beta_schedule"): ("betas", _floats),
    ("solver", "lin_tol"): ("lin_tol", float),
    ("solver", "sweep_tol"): ("sweep_tol", float),
    ("solver", "max_sweeps"): ("max_sweeps", int),
    ("diagnostics", "scans"): ("scans", lambda v: tuple(
        t.strip() for t in v.split(",") if t.strip())),
    ("diagnostics", "centers"): ("centers", _centers),
    ("diagnostics", "nu"): ("nu", lambda v: None if v == "auto" else float(v)),
    ("diagnostics", "eps_factors"): ("eps_factors", _floats),
    ("diagnostics", "holder_alphas"): ("holder_alphas", _floats),
    ("sphere", "k"): ("sphere_k", int),
    ("output", "dir"): ("out_dir", str),
    ("run", "workers"): ("workers", int),
    ("run", "seed"): ("seed", int),
}
# solver/run keys are also accepted outside any section
_TOPLEVEL = {k: v for (sec, k), v in _KEYS.items() if sec in ("solver", "run")}

#: boundary preset parameters forwarded to make_preset
_BOUNDARY_PARAM_TYPES = {"c": float, "psi1": float, "psi2": float,
                         "k": int, "path": str}


def parse_config(path) -> RunConfig:
    cfg = RunConfig()
    section = None
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected key = value")
            key, val = (t.strip() for t in line.split("=", 1))
            try:
                if section == "boundary" and key in _BOUNDARY_PARAM_TYPES:
                    cfg.boundary_params[key] = _BOUNDARY_PARAM_TYPES[key](val)
                elif (section, key) in _KEYS:
                    attr, conv = _KEYS[(section, key)]
                    setattr(cfg, attr, conv(val))
                elif section is None and key in _TOPLEVEL:
                    attr, conv = _TOPLEVEL[key]
                    setattr(cfg, attr, conv(val))
                else:
                    raise ConfigError(
                        f"{path}:{ln}: unknown key {key!r}"
                        + (f" in section [{section}]" if section else ""))
            except ConfigError:
                raise
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{path}:{ln}: bad value for {key!r}: {exc}") \
                    from exc
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg
