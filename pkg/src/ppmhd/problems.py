"""Benchmark problems: initial data, potentials, boundary rules, exact solutions.

Every problem is a :class:`Problem`; :func:`get_problem` looks one up by its
CLI name.  Initial data generators return primitive variables on the padded
grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Callable

import numpy as np

from .state import (BX, BY, BZ, CUSTOM, EN, GAMMA, MX, MY, MZ, NVAR, OUTFLOW, PERIODIC, RHO, Boundary,
                    FieldArray, Grid, to_conserved)

VORTEX_MU = 5.389489439
VORTEX_KAPPA = math.sqrt(2.0) * VORTEX_MU
ALFVEN_DELTA = 0.005
ROTATION_ANGLE = math.atan(0.5)
VACUUM = 1e-12
BLAST_B2D = 100.0 / math.sqrt(2.0 * math.pi)
BLAST_B3D = 100.0 / math.sqrt(4.0 * math.pi) / math.sqrt(2.0)


@dataclass
class Problem:
    name: str
    lo: tuple
    hi: tuple
    mesh: tuple
    rules: tuple
    t_final: float
    primitive: Callable
    potential: Callable | None = None
    custom_bc: Callable | None = None
    exact: Callable | None = None
    gamma: float = GAMMA
    full_mesh: tuple | None = None
    notes: dict = dc_field(default_factory=dict)

    @property
    def dims(self) -> int:
        return len(self.lo)

    def grid(self, mesh=None) -> Grid:
        mesh = tuple(self.mesh if mesh is None else mesh)
        if len(mesh) != self.dims:
            raise ValueError(f"{self.name} needs a {self.dims}-D mesh, got {mesh}")
        return Grid(mesh, self.lo, self.hi)

    def boundary(self, grid: Grid) -> Boundary:
        custom = self.custom_bc(grid) if self.custom_bc is not None else None
        return Boundary(self.rules, custom)

    def initial_field(self, grid: Grid) -> FieldArray:
        f = FieldArray.from_primitive(grid, self.primitive(grid), self.gamma)
        f.fill_ghosts(self.boundary(grid), 0.0)
        return f

    def initial_potential(self, grid: Grid) -> np.ndarray | None:
        if self.potential is None:
            return None
        A = self.potential(grid)
        self.boundary(grid).fill(A, grid, 0.0, "potential")
        return A


def _prim(shape) -> np.ndarray:
    return np.zeros((NVAR,) + tuple(shape))


# ---------------------------------------------------------------------------
# 1D problems
# ---------------------------------------------------------------------------

def _vacuum_primitive(xi: np.ndarray) -> np.ndarray:
    w = _prim(xi.shape)
    right = xi > 0.0
    w[RHO] = np.where(right, 1.0, VACUUM)
    w[EN] = np.where(right, 0.5, VACUUM)
    w[BY] = np.where(right, 1.0, 0.0)
    return w


def vacuum_shock_tube_1d() -> Problem:
    return Problem(
        name="vacuum-shock-1d", lo=(-0.5,), hi=(0.5,), mesh=(200,), rules=(OUTFLOW,), t_final=0.1,
        primitive=lambda grid: _vacuum_primitive(grid.coords()[0]),
        notes={"reference_mesh": 2000},
    )


def alfven_phase(x):
    d = ALFVEN_DELTA
    return np.pi / 8.0 * np.tanh((0.25 + x) / d + 1.0) * np.tanh((0.25 - x) / d + 1.0)


def _alfven_primitive(grid: Grid, constant_bx: bool = True) -> np.ndarray:
    x = grid.coords()[0]
    phi = alfven_phase(x)
    w = _prim(x.shape)
    w[RHO] = 1.0
    w[MX] = 10.0
    w[MY] = 10.0 * np.cos(phi)
    w[MZ] = 10.0 * np.sin(phi)
    w[EN] = 0.01
    # in 1D the normal field must be constant; the profile value is kept
    # only on request (it breaks positivity of the first-order scheme)
    w[BX] = -10.0 * np.cos(alfven_phase(0.0) if constant_bx else phi)
    w[BY] = -10.0 * np.sin(phi)
    return w


def torsional_alfven_pulse(constant_bx: bool = True) -> Problem:
    return Problem(
        name="alfven-pulse", lo=(-0.5,), hi=(0.5,), mesh=(800,), rules=(PERIODIC,), t_final=0.156,
        primitive=lambda grid: _alfven_primitive(grid, constant_bx),
    )


# ---------------------------------------------------------------------------
# smooth vortex
# ---------------------------------------------------------------------------

def vortex_primitive(x, y) -> np.ndarray:
    r2 = x * x + y * y
    e = np.exp(0.5 * (1.0 - r2))
    mu, ka = VORTEX_MU, VORTEX_KAPPA
    w = _prim(x.shape)
    w[RHO] = 1.0
    w[MX] = 1.0 - ka / (2 * np.pi) * e * y
    w[MY] = 1.0 + ka / (2 * np.pi) * e * x
    w[EN] = 1.0 + (mu * mu * (1.0 - r2) - ka * ka) / (8 * np.pi ** 2) * e * e
    w[BX] = -mu / (2 * np.pi) * e * y
    w[BY] = mu / (2 * np.pi) * e * x
    return w


def vortex_potential(x, y) -> np.ndarray:
    return VORTEX_MU / (2 * np.pi) * np.exp(0.5 * (1.0 - x * x - y * y))


def _wrap(v, lo, hi):
    return lo + np.mod(v - lo, hi - lo)


def _vortex_exact(grid: Grid, t: float) -> np.ndarray:
    """Primitives at interior points: the initial vortex translated by (t, t)."""
    x, y = grid.coords(ghosts=False)
    xs = _wrap(x - t, grid.lo[0], grid.hi[0])
    ys = _wrap(y - t, grid.lo[1], grid.hi[1])
    return vortex_primitive(xs, ys)


def smooth_vortex_2d() -> Problem:
    def prim(grid):
        x, y = grid.coords()
        return vortex_primitive(x, y)

    def pot(grid):
        x, y = grid.coords()
        return vortex_potential(x, y)[None]

    return Problem(
        name="smooth-vortex", lo=(-10.0, -10.0), hi=(10.0, 10.0), mesh=(80, 80), rules=(PERIODIC, PERIODIC),
        t_final=0.05, primitive=prim, potential=pot, exact=_vortex_exact,
    )


# ---------------------------------------------------------------------------
# rotated vacuum shock tube
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Reference1D:
    """Unrotated 1D solution at time ``t_ref`` sampled at points ``x``."""

    x: np.ndarray
    q: np.ndarray  # conserved, (8, n)
    a: np.ndarray  # potential, -integral of B_y from the left end
    t_ref: float

    def sample(self, xi: np.ndarray, t: float):
        """Self-similar evaluation at time ``t``: conserved states and A_z."""
        if t > self.t_ref * (1.0 + 1e-12):
            raise ValueError(f"time {t} beyond the reference horizon {self.t_ref}")
        if t <= 0.0:
            q = to_conserved(_vacuum_primitive(xi))
            return q, -np.maximum(xi, 0.0)
        s = xi * (self.t_ref / t)
        q = np.stack([np.interp(s, self.x, self.q[c]) for c in range(NVAR)])
        a = np.interp(s, self.x, self.a)
        # beyond the reference window the field is the constant right state
        beyond = s > self.x[-1]
        a = np.where(beyond, self.a[-1] - self.q[BY, -1] * (s - self.x[-1]), a)
        return q, (t / self.t_ref) * a


def compute_reference_1d(n: int = 2000, t_ref: float = 0.1) -> Reference1D:
    from .integrator import SolverConfig, advance_to

    prob = vacuum_shock_tube_1d()
    grid = prob.grid((n,))
    res = advance_to(prob.initial_field(grid), 0.0, t_ref, SolverConfig(), prob.boundary(grid),
                     raise_on_abort=True)
    x = grid.axis_coords(0, ghosts=False)
    q = res.field.interior.copy()
    h = grid.dx[0]
    # A(x) = -int_{-0.5}^{x} B_y, trapezoid between centres, half cell at the left end
    by = q[BY]
    a = -(np.concatenate([[0.0], np.cumsum(0.5 * (by[1:] + by[:-1]) * h)]) + 0.5 * h * by[0])
    return Reference1D(x, q, a, t_ref)


@lru_cache(maxsize=4)
def cached_reference(n: int = 2000, t_ref: float = 0.1) -> Reference1D:
    return compute_reference_1d(n, t_ref)


def rotation_frame(alpha: float = ROTATION_ANGLE):
    """Unit normal and tangent of the rotated interface."""
    e_perp = np.array([math.cos(alpha), math.sin(alpha)])
    e_par = np.array([-math.sin(alpha), math.cos(alpha)])
    return e_perp, e_par


def rotate_states(q1d: np.ndarray, alpha: float = ROTATION_ANGLE) -> np.ndarray:
    """Map 1D conserved states (x-normal frame) into the rotated 2D frame."""
    e_perp, e_par = rotation_frame(alpha)
    q = q1d.copy()
    for v in (MX, BX):
        n, p = q1d[v], q1d[v + 1]
        q[v] = n * e_perp[0] + p * e_par[0]
        q[v + 1] = n * e_perp[1] + p * e_par[1]
    return q


def xi_coordinate(x, y, alpha: float = ROTATION_ANGLE):
    return x * math.cos(alpha) + y * math.sin(alpha)


def _rotated_primitive(grid: Grid) -> np.ndarray:
    x, y = grid.coords()
    w1 = _vacuum_primitive(xi_coordinate(x, y))
    q = rotate_states(to_conserved(w1))
    w = q.copy()
    w[MX:MZ + 1] = q[MX:MZ + 1] / q[RHO]
    w[EN] = w1[EN]
    return w


def _rotated_potential(grid: Grid) -> np.ndarray:
    x, y = grid.coords()
    return -np.maximum(xi_coordinate(x, y), 0.0)[None]


def rotated_bc_fill(reference: Reference1D, alpha: float = ROTATION_ANGLE):
    """Ghost filler for the top and bottom boundaries."""

    def fill(data, grid, t, kind):
        g = grid.ghost
        x, y = grid.coords()
        xi = xi_coordinate(x, y, alpha)
        rows = [slice(0, g), slice(g + grid.n[1], None)]
        for r in rows:
            q, a = reference.sample(xi[:, r], t)
            if kind == "potential":
                data[0][:, r] = a
            else:
                data[(slice(None), slice(None), r)] = rotate_states(q, alpha)

    return fill


def rotated_vacuum_shock_tube(reference_mesh: int = 2000) -> Problem:
    return Problem(
        name="rotated-shock-2d", lo=(-0.6, -0.25), hi=(0.6, 0.25), mesh=(240, 100), rules=(OUTFLOW, CUSTOM),
        t_final=0.1, primitive=_rotated_primitive, potential=_rotated_potential,
        custom_bc=lambda grid: rotated_bc_fill(cached_reference(reference_mesh, 0.1)),
        notes={"reference_mesh": reference_mesh},
    )


# ---------------------------------------------------------------------------
# blast problems
# ---------------------------------------------------------------------------

def _blast_primitive(grid: Grid, b: float) -> np.ndarray:
    xs = grid.coords()
    r2 = sum(c * c for c in xs)
    w = _prim(xs[0].shape)
    w[RHO] = 1.0
    w[EN] = np.where(r2 < 0.01, 1000.0, 0.1)
    w[BX] = b
    w[BY] = b
    w[BZ] = 0.0
    return w


def blast_2d() -> Problem:
    def pot(grid):
        x, y = grid.coords()
        return (BLAST_B2D * (y - x))[None]

    return Problem(
        name="blast-2d", lo=(-0.5, -0.5), hi=(0.5, 0.5), mesh=(128, 128), rules=(OUTFLOW, OUTFLOW),
        t_final=0.01, primitive=lambda grid: _blast_primitive(grid, BLAST_B2D), potential=pot,
        full_mesh=(256, 256),
    )


def blast_3d() -> Problem:
    def pot(grid):
        x, y, _ = grid.coords()
        A = np.zeros((3,) + grid.shape)
        A[2] = BLAST_B3D * (y - x)
        return A

    return Problem(
        name="blast-3d", lo=(-0.5,) * 3, hi=(0.5,) * 3, mesh=(64, 64, 64), rules=(OUTFLOW,) * 3,
        t_final=0.01, primitive=lambda grid: _blast_primitive(grid, BLAST_B3D), potential=pot,
        full_mesh=(150, 150, 150),
    )


PROBLEMS = {
    "vacuum-shock-1d": vacuum_shock_tube_1d,
    "alfven-pulse": torsional_alfven_pulse,
    "smooth-vortex": smooth_vortex_2d,
    "rotated-shock-2d": rotated_vacuum_shock_tube,
    "blast-2d": blast_2d,
    "blast-3d": blast_3d,
}


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}") from None


__all__ = [
    "Problem", "PROBLEMS", "get_problem", "vacuum_shock_tube_1d", "torsional_alfven_pulse", "smooth_vortex_2d",
    "rotated_vacuum_shock_tube", "blast_2d", "blast_3d", "alfven_phase", "vortex_primitive",
    "vortex_potential", "Reference1D", "compute_reference_1d", "cached_reference", "rotate_states",
    "rotation_frame", "xi_coordinate", "rotated_bc_fill", "VORTEX_MU", "VORTEX_KAPPA", "ROTATION_ANGLE",
    "BLAST_B2D", "BLAST_B3D",
]
