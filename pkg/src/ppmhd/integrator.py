"""SSP-RK3 time stepping in the accumulated-flux form.

The three stages are evaluated as usual, but the step itself is applied as a
single conservative update with the combined flux

    F_rk = (F_n + F_1 + 4 F_2) / 6,

which is the quantity the positivity limiter blends with the first-order
Lax-Friedrichs flux.  When constrained transport is active the magnetic
potential advances in lock-step through the same stages and the field is
rebuilt from it at the end of the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .ct import CtOptions, correct_step, curl_padded, divergence_error, potential_rhs, _velocity
from .flux import global_alpha
from .limiter import EPS0, LimiterStats, PositivityError, lf_interface_fluxes, limit_fluxes, low_order_solution
from .state import EN, GAMMA, PERIODIC, RHO, BX, Boundary, FieldArray, pressure
from .weno import NonFiniteStateError, build_interface_fluxes, check_finite, flux_divergence


class SolverAbort(RuntimeError):
    """The run cannot continue; ``time`` and ``step`` locate the failure."""

    def __init__(self, reason: str, time: float, step: int):
        super().__init__(f"{reason} (t={time:.6g}, step {step})")
        self.reason = reason
        self.time = time
        self.step = step


@dataclass
class SolverConfig:
    gamma: float = GAMMA
    cfl: float = 0.5
    limiter: bool = True
    per_stage_limiting: bool = False
    eps0: float = EPS0
    ct: CtOptions | None = None
    min_dt: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if self.eps0 <= 0.0:
            raise ValueError("eps0 must be positive")

    @property
    def ct_on(self) -> bool:
        return self.ct is not None and self.ct.enabled


@dataclass
class DiagnosticsRecord:
    step: int
    time: float
    dt: float
    min_rho: float
    min_p: float
    div_l1: float
    total_energy: float
    energy_drift: float
    min_theta: float
    limited: int

    FIELDS = ("step", "time", "dt", "min_rho", "min_p", "div_l1", "total_energy", "energy_drift",
              "min_theta", "limited")

    def row(self):
        return [getattr(self, k) for k in self.FIELDS]


@dataclass
class StepInfo:
    dt: float
    stats: LimiterStats
    boundary_energy: float = 0.0
    eps: object = None


def compute_dt(field: FieldArray, cfl: float = 0.5, gamma: float = GAMMA) -> float:
    """``cfl / sum_d (alpha_d / dx_d)`` with ``alpha_d`` the global speed along ``d``."""
    if not 0.0 < cfl <= 0.5:
        raise ValueError("cfl must lie in (0, 0.5]")
    grid = field.grid
    rate = 0.0
    for d in range(grid.dims):
        a = global_alpha(field, d, gamma)
        if not math.isfinite(a):
            raise NonFiniteStateError("non-finite wave speed")
        rate += a / grid.dx[d]
    if rate <= 0.0:
        raise ValueError("all wave speeds vanish; time step undefined")
    return cfl / rate


def _periodic_flags(bc: Boundary | None, dims: int):
    if bc is None:
        return [False] * dims
    return [r == PERIODIC for r in bc.rules]


def _fill(bc, data, grid, t, kind="state"):
    if bc is not None:
        bc.fill(data, grid, t, kind)


def _stage_fluxes(field: FieldArray, gamma: float):
    return [build_interface_fluxes(field, d, global_alpha(field, d, gamma), gamma)
            for d in range(field.grid.dims)]


def _boundary_energy(fluxes, grid, periodic, dt) -> float:
    """Energy leaving the domain through non-periodic faces during ``dt``."""
    out = 0.0
    for d, F in enumerate(fluxes):
        if periodic[d]:
            continue
        area = grid.cell_volume / grid.dx[d]
        fe = np.moveaxis(F[EN], d, 0)
        out += dt * area * (float(np.sum(fe[-1])) - float(np.sum(fe[0])))
    return out


def _limited(high, field_n, dt, cfg, periodic, stats):
    grid = field_n.grid
    alphas = [global_alpha(field_n, d, cfg.gamma) for d in range(grid.dims)]
    low = [lf_interface_fluxes(field_n, d, alphas[d], cfg.gamma) for d in range(grid.dims)]
    q_low, eps = low_order_solution(field_n, dt, cfg.gamma, fluxes=low, eps0=cfg.eps0)
    return limit_fluxes(high, low, field_n, dt, eps, cfg.gamma, periodic, q_low.interior, stats), eps


def _update(field_n: FieldArray, fluxes, dt: float) -> FieldArray:
    out = field_n.copy()
    out.interior[...] -= dt * flux_divergence(fluxes, field_n.grid)
    return out


def ssp_rk3_step(field_n: FieldArray, dt: float, limiter: bool = True, gamma: float = GAMMA,
                 bc: Boundary | None = None, t: float = 0.0, config: SolverConfig | None = None,
                 potential: np.ndarray | None = None):
    """Advance one step.

    ``field_n`` must have its ghosts filled at time ``t``.  Returns
    ``(field_new, potential_new, StepInfo)``; ``potential_new`` is None when
    constrained transport is off.  The returned field has ghosts filled at
    ``t + dt`` and, with CT, carries the curl of the new potential.
    """
    cfg = config or SolverConfig(gamma=gamma, limiter=limiter)
    if config is not None:
        limiter = cfg.limiter
        gamma = cfg.gamma
    grid = field_n.grid
    periodic = _periodic_flags(bc, grid.dims)
    stats = LimiterStats()
    use_ct = cfg.ct_on and potential is not None
    rcoef = cfg.ct.resistivity_coeff if (use_ct and grid.dims == 3) else 0.0
    inner = (slice(None),) + grid.interior
    eps = None

    # stage 1
    Fn = _stage_fluxes(field_n, gamma)
    if limiter and cfg.per_stage_limiting:
        Fs, eps = _limited(Fn, field_n, dt, cfg, periodic, LimiterStats())
        q1 = _update(field_n, Fs, dt)
    else:
        q1 = _update(field_n, Fn, dt)
    _fill(bc, q1.data, grid, t + dt)
    if use_ct:
        r0 = potential_rhs(potential, _velocity(field_n.interior), grid, rcoef)
        A1 = potential.copy()
        A1[inner] += dt * r0
        _fill(bc, A1, grid, t + dt, "potential")

    # stage 2
    F1 = _stage_fluxes(q1, gamma)
    half = [0.5 * (a + b) for a, b in zip(Fn, F1)]
    if limiter and cfg.per_stage_limiting:
        Fs, eps = _limited(half, field_n, 0.5 * dt, cfg, periodic, LimiterStats())
        q2 = _update(field_n, Fs, 0.5 * dt)
    else:
        q2 = _update(field_n, half, 0.5 * dt)
    _fill(bc, q2.data, grid, t + 0.5 * dt)
    if use_ct:
        r1 = potential_rhs(A1, _velocity(q1.interior), grid, rcoef)
        A2 = potential.copy()
        A2[inner] += 0.25 * dt * (r0 + r1)
        _fill(bc, A2, grid, t + 0.5 * dt, "potential")

    # combined update
    F2 = _stage_fluxes(q2, gamma)
    Frk = [(a + b + 4.0 * c) / 6.0 for a, b, c in zip(Fn, F1, F2)]
    if limiter:
        Frk, eps = _limited(Frk, field_n, dt, cfg, periodic, stats)
    new = _update(field_n, Frk, dt)
    check_finite(new.interior)
    info = StepInfo(dt, stats, _boundary_energy(Frk, grid, periodic, dt), eps)

    A_new = None
    if use_ct:
        r2 = potential_rhs(A2, _velocity(q2.interior), grid, rcoef)
        A_new = potential.copy()
        A_new[inner] += dt / 6.0 * (r0 + r1 + 4.0 * r2)
        _fill(bc, A_new, grid, t + dt, "potential")
        new = correct_step(new, A_new, cfg.ct, gamma)
    _fill(bc, new.data, grid, t + dt)
    return new, A_new, info


def _min_pressure(q, gamma) -> float:
    rho = q[RHO]
    if np.any(rho == 0.0):
        return -math.inf
    return float(np.min(pressure(q, gamma)))


def field_divergence(field: FieldArray, potential: np.ndarray | None) -> float:
    """L1 divergence of the field, taken from the potential's curl under CT."""
    grid = field.grid
    if grid.dims == 1:
        return 0.0
    if potential is not None:
        return divergence_error(curl_padded(potential, grid), grid)
    return divergence_error(field.data[BX:BX + 3], grid)


@dataclass
class RunResult:
    field: FieldArray
    potential: np.ndarray | None
    t: float
    records: list = dc_field(default_factory=list)
    positive: bool = True
    aborted: bool = False
    reason: str = ""
    first_negative_time: float | None = None

    @property
    def steps(self) -> int:
        return len(self.records)


def advance_to(field: FieldArray, t0: float, t_final: float, config: SolverConfig,
               bc: Boundary | None = None, potential: np.ndarray | None = None,
               stop_on_negative: bool = False, raise_on_abort: bool = False,
               fixed_dt: float | None = None, callback=None, max_steps: int | None = None) -> RunResult:
    """March from ``t0`` to ``t_final``.

    Positivity is checked after every accepted step; ``first_negative_time``
    records the first step ending with non-positive density or pressure.
    Non-finite states, a collapsing time step and a failing first-order
    reference end the run with ``aborted=True`` (or raise :class:`SolverAbort`
    when ``raise_on_abort``).  ``callback(result)`` runs after each step.
    """
    if t_final < t0:
        raise ValueError("t_final must not precede t0")
    grid = field.grid
    gamma = config.gamma
    cur = field.copy()
    _fill(bc, cur.data, grid, t0)
    A = None
    if config.ct_on:
        if potential is None:
            raise ValueError("constrained transport needs an initial potential")
        A = potential.copy()
        _fill(bc, A, grid, t0, "potential")
    res = RunResult(cur, A, t0)
    e0 = float(np.sum(cur.interior[EN])) * grid.cell_volume
    escaped = 0.0
    t = t0
    step = 0

    def abort(reason):
        res.aborted = True
        res.reason = reason
        if raise_on_abort:
            raise SolverAbort(reason, t, step)
        return res

    while t < t_final:
        if max_steps is not None and step >= max_steps:
            break
        try:
            dt = fixed_dt if fixed_dt is not None else compute_dt(cur, config.cfl, gamma)
        except (NonFiniteStateError, ValueError) as exc:
            return abort(str(exc))
        if t + dt >= t_final or t_final - (t + dt) < 1e-12 * max(1.0, abs(t_final)):
            dt = t_final - t
        elif dt < config.min_dt:
            return abort(f"time step collapsed to {dt:.3e}")
        try:
            new, A_new, info = ssp_rk3_step(cur, dt, config.limiter, gamma, bc, t, config, A)
        except NonFiniteStateError as exc:
            return abort(f"non-finite state: {exc}")
        except PositivityError as exc:
            return abort(str(exc))
        step += 1
        t = t_final if dt == t_final - t else t + dt
        cur, A = new, A_new
        escaped += info.boundary_energy
        q = cur.interior
        if not np.all(np.isfinite(q)):
            res.field, res.potential, res.t = cur, A, t
            return abort("non-finite state after update")
        rho_min = float(np.min(q[RHO]))
        p_min = _min_pressure(q, gamma)
        energy = float(np.sum(q[EN])) * grid.cell_volume
        drift = (energy + escaped - e0) / abs(e0) if e0 != 0.0 else energy + escaped
        rec = DiagnosticsRecord(step, t, dt, rho_min, p_min, field_divergence(cur, A), energy, drift,
                                info.stats.min_theta, info.stats.limited)
        res.records.append(rec)
        res.field, res.potential, res.t = cur, A, t
        if callback is not None:
            callback(res)
        if not (rho_min > 0.0 and p_min > 0.0):
            if res.positive:
                res.first_negative_time = t
            res.positive = False
            if stop_on_negative:
                break
    return res


__all__ = [
    "SolverAbort", "SolverConfig", "DiagnosticsRecord", "StepInfo", "RunResult", "compute_dt",
    "ssp_rk3_step", "advance_to", "field_divergence",
]
