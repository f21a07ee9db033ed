"""Parametrized positivity-preserving flux limiter.

The high-order flux at every interface is blended with the first-order
Lax-Friedrichs flux,

    F_lim = theta * (F_high - f_low) + f_low,      theta in [0, 1],

with theta chosen per interface so that the updated density and pressure
stay above lower bounds taken from the first-order solution.

For one cell with faces ``f`` the update is affine in the limiting
parameters, ``q(theta) = q_low + sum_f theta_f * C_f``, where ``C_f`` is the
change caused by face ``f`` when fully unlimited.  Bounds are computed in two
steps: a box where density stays above ``eps_rho`` (exact, linear), then a
shrink of that box so that pressure, concave in ``q``, stays above ``eps_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .flux import physical_flux
from .state import BX, GAMMA, NVAR, RHO, FieldArray, pressure
from .weno import flux_divergence

EPS0 = 1e-13
BISECTION_STEPS = 10
# density targets are raised by this many ulps of the update's magnitude so
# that the floating-point flux update cannot land below eps_rho
ROUNDOFF_ULPS = 16.0


class PositivityError(RuntimeError):
    """The first-order reference solution lost positivity."""


@dataclass(frozen=True)
class EpsilonBounds:
    eps_rho: float
    eps_p: float
    eps0: float = EPS0


def lf_flux(qL, qR, d: int, alpha: float, gamma: float = GAMMA) -> np.ndarray:
    """Global Lax-Friedrichs flux between ``qL`` and ``qR`` along axis ``d``."""
    qL = np.asarray(qL, dtype=float)
    qR = np.asarray(qR, dtype=float)
    return 0.5 * (physical_flux(qL, d, gamma) + physical_flux(qR, d, gamma) - alpha * (qR - qL))


def lf_interface_fluxes(field: FieldArray, d: int, alpha: float, gamma: float = GAMMA) -> np.ndarray:
    """Lax-Friedrichs fluxes on the same interface set as the WENO builder."""
    grid = field.grid
    g = grid.ghost
    n = grid.n[d]
    idx_l = [slice(None)] + list(grid.interior)
    idx_r = list(idx_l)
    idx_l[d + 1] = slice(g - 1, g + n)
    idx_r[d + 1] = slice(g, g + n + 1)
    f = lf_flux(field.data[tuple(idx_l)], field.data[tuple(idx_r)], d, alpha, gamma)
    if grid.dims == 1:
        f[BX] = 0.0
    return f


def low_order_solution(field: FieldArray, dt: float, gamma: float = GAMMA, alphas=None,
                       eps0: float = EPS0, fluxes=None):
    """One forward-Euler Lax-Friedrichs step and the lower bounds it implies.

    Returns ``(q_low, EpsilonBounds)``; ``q_low`` carries the interior
    update and copies the ghosts of ``field``.
    """
    from .flux import global_alpha

    grid = field.grid
    if fluxes is None:
        if alphas is None:
            alphas = [global_alpha(field, d, gamma) for d in range(grid.dims)]
        fluxes = [lf_interface_fluxes(field, d, alphas[d], gamma) for d in range(grid.dims)]
    low = field.copy()
    low.interior[...] -= dt * flux_divergence(fluxes, grid)
    q = low.interior
    rho_min = float(np.min(q[RHO]))
    if rho_min <= 0.0:
        raise PositivityError(f"low-order scheme violated positivity (min density {rho_min:.3e})")
    p_min = float(np.min(pressure(q, gamma)))
    if p_min <= 0.0:
        raise PositivityError(f"low-order scheme violated positivity (min pressure {p_min:.3e})")
    return low, EpsilonBounds(min(rho_min, eps0), min(p_min, eps0), eps0)


def density_bounds_1d(Gamma: float, lamF_minus: float, lamF_plus: float, eps_rho: float):
    """Upper bounds for (theta_left, theta_right) keeping density >= eps_rho.

    ``Gamma`` is the first-order density of the cell and ``lamF_*`` are
    ``dt/dx * (f_high - f_low)`` for the density flux at the left and right
    faces.
    """
    rhs = eps_rho - Gamma
    if lamF_minus >= 0.0 and lamF_plus <= 0.0:
        return 1.0, 1.0
    if lamF_minus >= 0.0:
        return 1.0, min(1.0, rhs / (-lamF_plus))
    if lamF_plus <= 0.0:
        return min(1.0, rhs / lamF_minus), 1.0
    if Gamma - (lamF_plus - lamF_minus) >= eps_rho:
        return 1.0, 1.0
    lam = rhs / (lamF_minus - lamF_plus)
    return lam, lam


@njit(cache=True)
def _pressure(q, gamma):
    rho = q[0]
    if rho <= 0.0:
        return -math.inf
    kin = 0.5 * (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]) / rho
    mag = 0.5 * (q[5] * q[5] + q[6] * q[6] + q[7] * q[7])
    return (gamma - 1.0) * (q[4] - kin - mag)


@njit(cache=True)
def _rescale(qv, qlow, eps_p, gamma, work):
    if _pressure(qv, gamma) >= eps_p:
        return 1.0
    lo = 0.0
    hi = 1.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        for c in range(8):
            work[c] = mid * qv[c] + (1.0 - mid) * qlow[c]
        if _pressure(work, gamma) >= eps_p:
            lo = mid
        else:
            hi = mid
    return lo


def pressure_rescale_vertex(q_high_vertex, q_low, eps_p: float, gamma: float = GAMMA) -> float:
    """Largest dyadic ``r`` (ten bisection steps) with
    ``p(r q_high + (1 - r) q_low) >= eps_p``; 1 if the vertex is admissible."""
    qv = np.ascontiguousarray(q_high_vertex, dtype=float)
    ql = np.ascontiguousarray(q_low, dtype=float)
    return float(_rescale(qv, ql, float(eps_p), float(gamma), np.empty(8)))


@njit(cache=True)
def _cell_bounds(qlow, C, eps_rho, slack, eps_p, gamma, lam_rho, lam):
    ncell, nf, _ = C.shape
    nvert = 1 << nf
    qv = np.empty(8)
    work = np.empty(8)
    rmin = np.empty(nf)
    for i in range(ncell):
        gam = qlow[i, 0]
        # theta = 0 must stay feasible
        target = min(eps_rho + slack[i], max(gam, eps_rho))
        nharm = 0
        s = 0.0
        for f in range(nf):
            c = C[i, f, 0]
            if c < 0.0:
                nharm += 1
                s += c
        for f in range(nf):
            lam_rho[i, f] = 1.0
        if nharm == 1:
            for f in range(nf):
                c = C[i, f, 0]
                if c < 0.0:
                    lam_rho[i, f] = min(1.0, (target - gam) / c)
        elif nharm > 1 and gam + s < target:
            v = (target - gam) / s
            for f in range(nf):
                if C[i, f, 0] < 0.0:
                    lam_rho[i, f] = v
        for f in range(nf):
            if lam_rho[i, f] < 0.0:
                lam_rho[i, f] = 0.0
            rmin[f] = 1.0
        for mask in range(1, nvert):
            for c in range(8):
                qv[c] = qlow[i, c]
            for f in range(nf):
                if mask & (1 << f):
                    lf = lam_rho[i, f]
                    for c in range(8):
                        qv[c] += lf * C[i, f, c]
            r = _rescale(qv, qlow[i], eps_p, gamma, work)
            if r < 1.0:
                for f in range(nf):
                    if mask & (1 << f) and r < rmin[f]:
                        rmin[f] = r
        for f in range(nf):
            lam[i, f] = lam_rho[i, f] * rmin[f]


def cell_bounds(q_low: np.ndarray, C: np.ndarray, eps: EpsilonBounds, gamma: float = GAMMA,
                rho_slack: np.ndarray | None = None):
    """Per-cell admissible ranges.

    ``q_low`` is ``(ncell, 8)``; ``C`` is ``(ncell, nfaces, 8)`` with the
    fully unlimited contribution of each face.  Returns
    ``(lambda_density, lambda_final)``, both ``(ncell, nfaces)``; any theta in
    the box ``[0, lambda_final]`` keeps density >= eps_rho and pressure >=
    eps_p in that cell.  ``rho_slack`` (per cell, default 0) raises the
    density target to absorb round-off of the eventual flux update.
    """
    q_low = np.ascontiguousarray(q_low, dtype=float)
    C = np.ascontiguousarray(C, dtype=float)
    lam_rho = np.empty(C.shape[:2])
    lam = np.empty(C.shape[:2])
    slack = np.zeros(C.shape[0]) if rho_slack is None else np.ascontiguousarray(rho_slack, dtype=float)
    _cell_bounds(q_low, C, float(eps.eps_rho), slack, float(eps.eps_p), float(gamma), lam_rho, lam)
    return lam_rho, lam


def cell_bounds_1d(q_low, dF_minus, dF_plus, lam_ratio: float, eps: EpsilonBounds, gamma: float = GAMMA):
    """Bounds (Lambda_left, Lambda_right) for a single 1D cell.

    ``dF_minus``/``dF_plus`` are ``F_high - f_low`` (8-vectors) at the left
    and right faces, ``lam_ratio`` is dt/dx.
    """
    C = np.stack([lam_ratio * np.asarray(dF_minus, float), -lam_ratio * np.asarray(dF_plus, float)])
    _, lam = cell_bounds(np.asarray(q_low, float)[None], C[None], eps, gamma)
    return float(lam[0, 0]), float(lam[0, 1])


@dataclass
class LimiterStats:
    min_theta: float = 1.0
    limited: int = 0


def _face(F: np.ndarray, d: int, sl: slice) -> np.ndarray:
    idx = [slice(None)] * F.ndim
    idx[d + 1] = sl
    return F[tuple(idx)]


def limit_fluxes(high, low, field_n: FieldArray, dt: float, eps: EpsilonBounds, gamma: float = GAMMA,
                 periodic=None, q_low=None, stats: LimiterStats | None = None):
    """Blend per-direction high-order fluxes towards the Lax-Friedrichs ones.

    ``high`` and ``low`` are lists of interface flux arrays (one per axis).
    ``periodic[d]`` marks axes whose first and last interfaces coincide.
    Returns the list of limited fluxes.
    """
    grid = field_n.grid
    nd = grid.dims
    if periodic is None:
        periodic = [False] * nd
    if q_low is None:
        q_low = field_n.interior - dt * flux_divergence(low, grid)
    ncell = int(np.prod(grid.n))
    C = np.empty((ncell, 2 * nd, NVAR))
    scale = np.abs(field_n.interior[RHO])
    for d in range(nd):
        lr = dt / grid.dx[d]
        dF = lr * (high[d] - low[d])
        n = grid.n[d]
        C[:, 2 * d, :] = _face(dF, d, slice(0, n)).reshape(NVAR, -1).T
        C[:, 2 * d + 1, :] = -_face(dF, d, slice(1, n + 1)).reshape(NVAR, -1).T
        mag = lr * (np.abs(high[d][RHO]) + np.abs(low[d][RHO]))
        scale = scale + _face(mag[None], d, slice(0, n))[0] + _face(mag[None], d, slice(1, n + 1))[0]
    qcells = np.ascontiguousarray(q_low.reshape(NVAR, -1).T)
    slack = ROUNDOFF_ULPS * np.finfo(float).eps * scale.ravel()
    _, lam = cell_bounds(qcells, C, eps, gamma, slack)

    limited = []
    for d in range(nd):
        n = grid.n[d]
        lam_left = np.moveaxis(lam[:, 2 * d].reshape(grid.n), d, 0)
        lam_right = np.moveaxis(lam[:, 2 * d + 1].reshape(grid.n), d, 0)
        theta = np.empty((n + 1,) + lam_left.shape[1:])
        theta[1:n] = np.minimum(lam_right[:-1], lam_left[1:])
        if periodic[d]:
            edge = np.minimum(lam_left[0], lam_right[-1])
            theta[0] = edge
            theta[n] = edge
        else:
            theta[0] = lam_left[0]
            theta[n] = lam_right[-1]
        theta = np.moveaxis(theta, 0, d)
        limited.append(low[d] + theta[None] * (high[d] - low[d]))
        if stats is not None:
            stats.min_theta = min(stats.min_theta, float(theta.min()))
            stats.limited += int(np.count_nonzero(theta < 1.0))
    return limited


__all__ = [
    "EPS0", "BISECTION_STEPS", "PositivityError", "EpsilonBounds", "LimiterStats", "lf_flux",
    "lf_interface_fluxes", "low_order_solution", "density_bounds_1d", "pressure_rescale_vertex",
    "cell_bounds", "cell_bounds_1d", "limit_fluxes",
]
