"""Run configuration, output writers, convergence studies and scheme comparison."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, fields, replace

import numpy as np

from .ct import CtOptions
from .integrator import DiagnosticsRecord, RunResult, SolverConfig, advance_to
from .limiter import EPS0
from .problems import PROBLEMS, get_problem
from .state import BX, BY, BZ, EN, GAMMA, MX, MY, MZ, RHO, FieldArray

EXIT_OK = 0
EXIT_ABORT = 2
EXIT_CONFIG = 3


class ConfigError(ValueError):
    """Invalid run configuration."""


def _parse_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("on", "true", "yes", "1"):
        return True
    if s in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"expected on/off, got {v!r}")


@dataclass
class RunConfig:
    problem: str = "blast-2d"
    mesh: tuple | None = None
    cfl: float = 0.5
    t_final: float | None = None
    gamma: float = GAMMA
    limiter: bool = True
    ct: bool | None = None
    energy_option: int = 2
    per_stage_limiting: bool = False
    eps0: float = EPS0
    out: str | None = None
    dump_interval: float | None = None
    resistivity_coeff: float = 0.05

    def validate(self) -> "RunConfig":
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEMS)}")
        prob = get_problem(self.problem)
        if self.mesh is not None:
            if len(self.mesh) != prob.dims:
                raise ConfigError(f"{self.problem} needs {prob.dims} mesh sizes, got {len(self.mesh)}")
            if any(int(n) < 5 for n in self.mesh):
                raise ConfigError(f"invalid mesh {self.mesh}")
        if not 0.0 < self.cfl <= 0.5:
            raise ConfigError("cfl must lie in (0, 0.5]")
        if self.gamma <= 1.0:
            raise ConfigError("gamma must exceed 1")
        if self.t_final is not None and self.t_final < 0.0:
            raise ConfigError("t_final must be non-negative")
        if self.energy_option not in (1, 2):
            raise ConfigError("energy_option must be 1 or 2")
        if self.eps0 <= 0.0:
            raise ConfigError("eps0 must be positive")
        if self.resistivity_coeff < 0.0:
            raise ConfigError("resistivity_coeff must be non-negative")
        if self.dump_interval is not None and self.dump_interval <= 0.0:
            raise ConfigError("dump_interval must be positive")
        if self.ct and prob.dims == 1:
            raise ConfigError("constrained transport is not used in 1D (the normal field is constant)")
        if self.ct and prob.potential is None:
            raise ConfigError(f"{self.problem} has no magnetic potential")
        return self

    @property
    def ct_enabled(self) -> bool:
        if self.ct is None:
            return get_problem(self.problem).potential is not None
        return self.ct

    def solver_config(self) -> SolverConfig:
        ct = CtOptions(True, self.energy_option, self.resistivity_coeff) if self.ct_enabled else None
        return SolverConfig(gamma=self.gamma, cfl=self.cfl, limiter=self.limiter,
                            per_stage_limiting=self.per_stage_limiting, eps0=self.eps0, ct=ct)

    def update(self, values: dict) -> "RunConfig":
        """Return a copy with string or typed overrides applied."""
        known = {f.name: f for f in fields(self)}
        kw = {}
        for key, v in values.items():
            name = key.replace("-", "_")
            if name in ("nx", "ny", "nz"):
                continue
            if name not in known:
                raise ConfigError(f"unknown setting {key!r}")
            if v is None:
                continue
            kw[name] = _coerce(name, v)
        mesh = [values.get(k) for k in ("nx", "ny", "nz") if values.get(k) is not None]
        if mesh:
            kw["mesh"] = tuple(int(m) for m in mesh)
        return replace(self, **kw)


def _coerce(name, v):
    if name in ("limiter", "per_stage_limiting", "ct"):
        return _parse_bool(v)
    try:
        if name in ("cfl", "gamma", "eps0", "resistivity_coeff", "t_final", "dump_interval"):
            return float(v)
        if name == "energy_option":
            return int(v)
        if name == "mesh":
            if isinstance(v, str):
                return tuple(int(s) for s in v.replace("x", ",").split(",") if s.strip())
            return tuple(int(s) for s in v)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {v!r}") from exc
    return str(v) if isinstance(v, str) else v


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            values = parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = RunConfig().update(values)
    if overrides:
        cfg = cfg.update(overrides)
    return cfg.validate()


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

FRAME_COLUMNS = ("rho", "ux", "uy", "uz", "p", "bx", "by", "bz", "speed", "pmag")
AXES = ("x", "y", "z")


def frame_table(field: FieldArray, gamma: float = GAMMA) -> tuple[list, np.ndarray]:
    grid = field.grid
    q = field.interior
    with np.errstate(all="ignore"):
        rho = q[RHO]
        u = q[MX:MZ + 1] / rho
        b = q[BX:BZ + 1]
        p = (gamma - 1.0) * (q[EN] - 0.5 * rho * np.sum(u * u, axis=0) - 0.5 * np.sum(b * b, axis=0))
        cols = [rho, u[0], u[1], u[2], p, b[0], b[1], b[2], np.sqrt(np.sum(u * u, axis=0)),
                0.5 * np.sum(b * b, axis=0)]
    coords = grid.coords(ghosts=False)
    names = list(AXES[:grid.dims]) + list(FRAME_COLUMNS)
    table = np.stack([c.ravel() for c in coords] + [c.ravel() for c in cols], axis=1)
    return names, table


def write_frame(path: str, field: FieldArray, t: float, gamma: float = GAMMA, potential=None) -> str:
    names, table = frame_table(field, gamma)
    grid = field.grid
    header = [f"time = {t:.17g}", f"mesh = {' '.join(str(n) for n in grid.n)}", f"gamma = {gamma:.17g}"]
    if potential is not None:
        header.append("potential = stored in companion .npy")
        np.save(os.path.splitext(path)[0] + "_potential.npy", potential)
    header.append(" ".join(names))
    np.savetxt(path, table, fmt="%.17g", header="\n".join(header), comments="# ")
    return path


def read_frame(path: str):
    """Return ``(meta, names, table)``."""
    meta = {}
    names = []
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            else:
                names = body.split()
    table = np.loadtxt(path, comments="#", ndmin=2)
    return meta, names, table


def write_diagnostics(path: str, records) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DiagnosticsRecord.FIELDS)
        for r in records:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r.row()])
    return path


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------

@dataclass
class RunOutcome:
    result: RunResult
    exit_code: int
    files: list


def execute(cfg: RunConfig, stop_on_negative: bool = False, max_steps: int | None = None,
            write: bool = True) -> RunOutcome:
    """Run one configuration, writing frames and diagnostics under ``cfg.out``."""
    cfg.validate()
    prob = get_problem(cfg.problem)
    prob.gamma = cfg.gamma
    grid = prob.grid(cfg.mesh)
    bc = prob.boundary(grid)
    field = prob.initial_field(grid)
    A = prob.initial_potential(grid) if cfg.ct_enabled else None
    t_final = prob.t_final if cfg.t_final is None else cfg.t_final
    scfg = cfg.solver_config()
    out = cfg.out if write else None
    files = []
    if out:
        os.makedirs(out, exist_ok=True)
        files.append(write_frame(os.path.join(out, "frame_0000.txt"), field, 0.0, cfg.gamma))

    t = 0.0
    records = []
    result = None
    k = 0
    targets = []
    if cfg.dump_interval:
        m = 1
        while m * cfg.dump_interval < t_final * (1 - 1e-12):
            targets.append(m * cfg.dump_interval)
            m += 1
    targets.append(t_final)
    for target in targets:
        if t >= target and result is not None:
            continue
        result = advance_to(field, t, target, scfg, bc, A, stop_on_negative=stop_on_negative,
                            max_steps=None if max_steps is None else max_steps - len(records))
        for r in result.records:
            r.step += len(records)
        records.extend(result.records)
        field, A, t = result.field, result.potential, result.t
        k += 1
        if out and result.records:
            files.append(write_frame(os.path.join(out, f"frame_{k:04d}.txt"), field, t, cfg.gamma))
        if result.aborted or (stop_on_negative and not result.positive):
            break
        if max_steps is not None and len(records) >= max_steps:
            break
    result.records = records
    if out:
        files.append(write_diagnostics(os.path.join(out, "diagnostics.csv"), records))
    return RunOutcome(result, EXIT_ABORT if result.aborted else EXIT_OK, files)


# ---------------------------------------------------------------------------
# convergence study
# ---------------------------------------------------------------------------

def observed_order(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float:
    if e_coarse == e_fine:
        return 0.0
    return math.log(e_coarse / e_fine) / math.log(ratio)


QUANTITIES = ("ux", "uy", "bx", "by")


def vortex_errors(field: FieldArray, t: float) -> dict:
    """L1 (mean absolute) and Linf errors of the vortex against translation."""
    prob = get_problem("smooth-vortex")
    w = prob.exact(field.grid, t)
    q = field.interior
    got = {"ux": q[MX] / q[RHO], "uy": q[MY] / q[RHO], "bx": q[BX], "by": q[BY]}
    ref = {"ux": w[MX], "uy": w[MY], "bx": w[BX], "by": w[BY]}
    out = {}
    for k in QUANTITIES:
        e = np.abs(got[k] - ref[k])
        out[k] = (float(np.mean(e)), float(np.max(e)))
    return out


def convergence_study(meshes=(40, 80, 160), t_final: float = 0.05, base: RunConfig | None = None):
    """Rows ``{mesh, errors: {q: (L1, Linf)}, orders: {q: (L1, Linf) or None}}``."""
    base = base or RunConfig(problem="smooth-vortex")
    rows = []
    for i, n in enumerate(meshes):
        cfg = replace(base, problem="smooth-vortex", mesh=(n, n), t_final=t_final, out=None)
        res = execute(cfg, write=False).result
        if res.aborted:
            raise RuntimeError(f"vortex run on {n}^2 aborted: {res.reason}")
        errs = vortex_errors(res.field, res.t)
        orders = None
        if i > 0 and n == 2 * meshes[i - 1]:
            prev = rows[-1]["errors"]
            orders = {k: (observed_order(prev[k][0], errs[k][0]), observed_order(prev[k][1], errs[k][1]))
                      for k in QUANTITIES}
        rows.append({"mesh": n, "errors": errs, "orders": orders})
    return rows


def format_convergence(rows) -> str:
    lines = ["# L1 = mean absolute pointwise error; order = log2(e_coarse / e_fine)"]
    head = "mesh".ljust(10) + "".join(f"{q + ' L1':>12}{'order':>7}{q + ' Linf':>12}{'order':>7}" for q in QUANTITIES)
    lines.append(head)
    for r in rows:
        s = f"{r['mesh']}x{r['mesh']}".ljust(10)
        for q in QUANTITIES:
            l1, li = r["errors"][q]
            o = r["orders"][q] if r["orders"] else None
            s += f"{l1:12.3e}{'-' if o is None else f'{o[0]:.2f}':>7}{li:12.3e}{'-' if o is None else f'{o[1]:.2f}':>7}"
        lines.append(s)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# scheme comparison
# ---------------------------------------------------------------------------

SCHEMES = {
    "WENO-HCL": dict(limiter=False, ct=False),
    "WENO-CT-OP1": dict(limiter=False, ct=True, energy_option=1),
    "WENO-CT-OP2": dict(limiter=False, ct=True, energy_option=2),
    "PP-WENO-CT-OP2": dict(limiter=True, ct=True, energy_option=2),
}


def compare_schemes(meshes=(150,), t_final: float | None = None, problem: str = "blast-2d", schemes=None):
    """Positivity (checked after every step) and stability (reached t_final)
    for each scheme and mesh."""
    rows = []
    for name in schemes or SCHEMES:
        for n in meshes:
            cfg = RunConfig(problem=problem, mesh=(n,) * get_problem(problem).dims, t_final=t_final,
                            **SCHEMES[name])
            res = execute(cfg, write=False).result
            rows.append({"scheme": name, "mesh": n, "positivity": res.positive, "stability": not res.aborted,
                         "first_negative": res.first_negative_time, "t_end": res.t, "reason": res.reason})
    return rows


def format_comparison(rows) -> str:
    lines = [f"{'scheme':<16}{'mesh':>6}  {'Positivity':<11}{'Stability':<10}note"]
    for r in rows:
        note = r["reason"] or ("" if r["first_negative"] is None else f"negative at t={r['first_negative']:.4g}")
        lines.append(f"{r['scheme']:<16}{r['mesh']:>6}  {'Yes' if r['positivity'] else 'No':<11}"
                     f"{'Yes' if r['stability'] else 'No':<10}{note}")
    return "\n".join(lines)


__all__ = [
    "EXIT_OK", "EXIT_ABORT", "EXIT_CONFIG", "ConfigError", "RunConfig", "parse_config_text", "load_config",
    "write_frame", "read_frame", "frame_table", "write_diagnostics", "RunOutcome", "execute", "observed_order",
    "vortex_errors", "convergence_study", "format_convergence", "SCHEMES", "compare_schemes",
    "format_comparison",
]
