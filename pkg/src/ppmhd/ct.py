"""Unstaggered constrained transport.

The magnetic potential lives on the same padded grid as the conserved
variables: shape ``(1, *grid.shape)`` in 2D (A_z only) and ``(3, *grid.shape)``
in 3D.  It is advected with upwind WENO derivatives under the Weyl gauge,
and at the end of every time step the magnetic field is rebuilt as a
fourth-order central curl of the potential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import BX, BZ, EN, GAMMA, MX, RHO, FieldArray, Grid
from .weno import scalar_weno_derivative


@dataclass(frozen=True)
class CtOptions:
    enabled: bool = True
    energy_option: int = 2
    resistivity_coeff: float = 0.05

    def __post_init__(self):
        if self.energy_option not in (1, 2):
            raise ValueError("energy_option must be 1 or 2")
        if self.resistivity_coeff < 0.0:
            raise ValueError("resistivity_coeff must be non-negative")


def potential_components(dims: int) -> int:
    if dims == 2:
        return 1
    if dims == 3:
        return 3
    raise ValueError("constrained transport needs a 2D or 3D grid")


def central_derivative(a: np.ndarray, grid: Grid, d: int, ext: int = 0) -> np.ndarray:
    """Fourth-order central derivative along axis ``d`` of a padded scalar
    field, on the interior grown by ``ext`` layers in every direction."""
    g = grid.ghost
    if ext > g - 2:
        raise ValueError("stencil does not fit in the ghost layers")
    base = [slice(g - ext, g + n + ext) for n in grid.n]

    def shifted(k):
        idx = list(base)
        n = grid.n[d]
        idx[d] = slice(g - ext + k, g + n + ext + k)
        return a[tuple(idx)]

    return (shifted(-2) - 8.0 * shifted(-1) + 8.0 * shifted(1) - shifted(2)) / (12.0 * grid.dx[d])


def curl(A: np.ndarray, grid: Grid, ext: int = 0, bz=None) -> np.ndarray:
    """Discrete curl of a padded potential.

    In 2D returns ``(dAz/dy, -dAz/dx, bz)`` where ``bz`` (the out-of-plane
    field, untouched by the potential) defaults to zero.  The result covers
    the interior grown by ``ext`` layers.
    """
    if grid.dims == 2:
        az = A[0]
        bx = central_derivative(az, grid, 1, ext)
        by = -central_derivative(az, grid, 0, ext)
        out = np.empty((3,) + bx.shape)
        out[0] = bx
        out[1] = by
        out[2] = 0.0 if bz is None else bz
        return out
    if grid.dims == 3:
        ax, ay, az = A
        out = np.empty((3,) + tuple(n + 2 * ext for n in grid.n))
        out[0] = central_derivative(az, grid, 1, ext) - central_derivative(ay, grid, 2, ext)
        out[1] = central_derivative(ax, grid, 2, ext) - central_derivative(az, grid, 0, ext)
        out[2] = central_derivative(ay, grid, 0, ext) - central_derivative(ax, grid, 1, ext)
        return out
    raise ValueError("curl needs a 2D or 3D grid")


def curl_padded(A: np.ndarray, grid: Grid) -> np.ndarray:
    """Curl on the padded grid: exact stencil values on the interior plus two
    ghost layers (enough for the divergence stencil), outer layers copied."""
    B = np.zeros((3,) + grid.shape)
    g = grid.ghost
    inner = tuple(slice(g - 2, g + n + 2) for n in grid.n)
    B[(slice(None),) + inner] = curl(A, grid, ext=2)
    for d in range(grid.dims):
        n = grid.n[d]
        for k in range(g - 2):
            lo = [slice(None)] * (grid.dims + 1)
            hi = list(lo)
            lo[d + 1] = k
            hi[d + 1] = g + n + 2 + k
            src_lo = list(lo)
            src_hi = list(lo)
            src_lo[d + 1] = g - 2
            src_hi[d + 1] = g + n + 1
            B[tuple(lo)] = B[tuple(src_lo)]
            B[tuple(hi)] = B[tuple(src_hi)]
    return B


def divergence(B: np.ndarray, grid: Grid) -> np.ndarray:
    """Fourth-order central divergence at interior points of a padded field."""
    div = np.zeros(grid.n)
    for d in range(grid.dims):
        div += central_derivative(B[d], grid, d)
    return div


def divergence_error(B: np.ndarray, grid: Grid) -> float:
    """L1 norm (cell-volume weighted sum) of the discrete divergence."""
    return float(np.sum(np.abs(divergence(B, grid))) * grid.cell_volume)


def _velocity(q: np.ndarray) -> np.ndarray:
    rho = np.maximum(np.abs(q[RHO]), 1e-300)
    return q[MX:MX + 3] / rho


def potential_rhs(A: np.ndarray, velocity: np.ndarray, grid: Grid, resistivity_coeff: float = 0.0) -> np.ndarray:
    """Right-hand side of the Weyl-gauge potential equation at interior points.

    2D: ``-(ux dAz/dx + uy dAz/dy)``.
    3D: ``u x (curl A)`` with every derivative along axis ``d`` upwinded by
    the sign of ``u_d``, plus artificial resistivity
    ``resistivity_coeff * max|u| * dx * laplacian(A)``.
    """
    if grid.dims == 2:
        ux, uy = velocity[0], velocity[1]
        ax = scalar_weno_derivative(A[0], grid, 0, ux)
        ay = scalar_weno_derivative(A[0], grid, 1, uy)
        return -(ux * ax + uy * ay)[None]
    if grid.dims != 3:
        raise ValueError("potential evolution needs a 2D or 3D grid")
    D = [[scalar_weno_derivative(A[c], grid, d, velocity[d]) for d in range(3)] for c in range(3)]
    u = velocity
    # B = curl A; rhs = u x B
    bx = D[2][1] - D[1][2]
    by = D[0][2] - D[2][0]
    bz = D[1][0] - D[0][1]
    rhs = np.empty((3,) + grid.n)
    rhs[0] = u[1] * bz - u[2] * by
    rhs[1] = u[2] * bx - u[0] * bz
    rhs[2] = u[0] * by - u[1] * bx
    if resistivity_coeff > 0.0:
        umax = float(np.max(np.abs(u)))
        if umax > 0.0:
            eta = resistivity_coeff * umax * max(grid.dx)
            g = grid.ghost
            inner = grid.interior
            for c in range(3):
                lap = np.zeros(grid.n)
                for d in range(3):
                    n = grid.n[d]
                    lo = list(inner)
                    hi = list(inner)
                    lo[d] = slice(g - 1, g + n - 1)
                    hi[d] = slice(g + 1, g + n + 1)
                    lap += (A[c][tuple(lo)] - 2.0 * A[c][inner] + A[c][tuple(hi)]) / grid.dx[d] ** 2
                rhs[c] += eta * lap
    return rhs


def evolve_potential(A: np.ndarray, velocities, dt: float, grid: Grid, fill=None,
                     resistivity_coeff: float = 0.0) -> np.ndarray:
    """One SSP-RK3 step of the potential with prescribed stage velocities.

    ``velocities`` holds the interior velocity fields at the three stages
    (time n, stage 1, stage 2).  ``fill(A, t_offset)`` refreshes ghosts; the
    default keeps the incoming ghost values.
    """
    inner = (slice(None),) + grid.interior

    def rhs(a, k):
        return potential_rhs(a, velocities[k], grid, resistivity_coeff)

    r0 = rhs(A, 0)
    a1 = A.copy()
    a1[inner] += dt * r0
    if fill is not None:
        fill(a1, dt)
    r1 = rhs(a1, 1)
    a2 = A.copy()
    a2[inner] += 0.25 * dt * (r0 + r1)
    if fill is not None:
        fill(a2, 0.5 * dt)
    r2 = rhs(a2, 2)
    out = A.copy()
    out[inner] += dt / 6.0 * (r0 + r1 + 4.0 * r2)
    if fill is not None:
        fill(out, dt)
    return out


def evolve_potential_2d(Az, velocities, dt, grid, fill=None):
    return evolve_potential(Az, velocities, dt, grid, fill)


def evolve_potential_3d(A, velocities, dt, grid, fill=None, resistivity_coeff: float = 0.05):
    return evolve_potential(A, velocities, dt, grid, fill, resistivity_coeff)


def correct_step(state_star: FieldArray, A_new: np.ndarray, opts: CtOptions, gamma: float = GAMMA) -> FieldArray:
    """Replace the predicted field by the curl of ``A_new`` (ghosts filled)
    and set the energy per ``opts.energy_option``."""
    grid = state_star.grid
    out = state_star.copy()
    q = out.interior
    b_old = q[BX:BZ + 1].copy()
    b_new = curl(A_new, grid, bz=b_old[2])
    q[BX:BZ + 1] = b_new
    if opts.energy_option == 2:
        q[EN] += 0.5 * (np.sum(b_new ** 2, axis=0) - np.sum(b_old ** 2, axis=0))
    return out


__all__ = [
    "CtOptions", "potential_components", "central_derivative", "curl", "curl_padded", "divergence",
    "divergence_error", "potential_rhs", "evolve_potential", "evolve_potential_2d",
    "evolve_potential_3d", "correct_step",
]
