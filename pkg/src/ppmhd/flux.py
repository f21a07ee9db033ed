"""Physical fluxes, wave speeds and the 7-wave characteristic eigensystem.

Every direction is handled through the x-direction formulas: the momentum
and magnetic components are cyclically permuted so that the sweep axis comes
first (see ``PERM``), the x kernel runs, and the result is permuted back.

The eigensystem works on the seven variables left after dropping the normal
magnetic component, whose flux in its own direction is identically zero.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .state import BX, EN, GAMMA, MX, NVAR, RHO

# component order that rotates axis d onto x
PERM = (
    np.array([0, 1, 2, 3, 4, 5, 6, 7]),
    np.array([0, 2, 3, 1, 4, 6, 7, 5]),
    np.array([0, 3, 1, 2, 4, 7, 5, 6]),
)
# the seven characteristic variables inside a rotated state
CHAR = np.array([0, 1, 2, 3, 4, 6, 7])
NCHAR = 7


def rotate(q: np.ndarray, d: int) -> np.ndarray:
    return q[PERM[d]]


def unrotate(f: np.ndarray, d: int) -> np.ndarray:
    out = np.empty_like(f)
    out[PERM[d]] = f
    return out


def _x_flux(q, gamma):
    rho = q[0]
    u = q[1] / rho
    v = q[2] / rho
    w = q[3] / rho
    bx, by, bz = q[5], q[6], q[7]
    b2 = bx * bx + by * by + bz * bz
    p = (gamma - 1.0) * (q[4] - 0.5 * rho * (u * u + v * v + w * w) - 0.5 * b2)
    ptot = p + 0.5 * b2
    udotb = u * bx + v * by + w * bz
    f = np.empty_like(q)
    f[0] = q[1]
    f[1] = q[1] * u + ptot - bx * bx
    f[2] = q[1] * v - bx * by
    f[3] = q[1] * w - bx * bz
    f[4] = u * (q[4] + ptot) - bx * udotb
    f[5] = 0.0
    f[6] = u * by - v * bx
    f[7] = u * bz - w * bx
    return f


def physical_flux(q, d: int = 0, gamma: float = GAMMA) -> np.ndarray:
    """Flux of the ideal MHD system along axis ``d`` for state(s) ``q``."""
    q = np.asarray(q, dtype=float)
    return unrotate(_x_flux(rotate(q, d), gamma), d)


def fast_speed_primitive(rho, p, bn, bt2, gamma: float = GAMMA):
    """Fast magnetosonic speed from density, pressure, normal field and
    squared tangential field.  Works on scalars or arrays."""
    a2 = gamma * p / rho
    bn2 = bn * bn / rho
    t2 = bt2 / rho
    disc = np.sqrt((a2 - bn2) ** 2 + t2 * (2.0 * (a2 + bn2) + t2))
    return np.sqrt(0.5 * (a2 + bn2 + t2 + disc))


def fast_speed(w, d: int = 0, gamma: float = GAMMA):
    """Fast speed along axis ``d`` for primitive state(s) ``w``."""
    w = np.asarray(w, dtype=float)
    if np.any(w[RHO] <= 0.0):
        raise ValueError("fast speed requires positive density")
    bn = w[BX + d]
    bt2 = w[BX + (d + 1) % 3] ** 2 + w[BX + (d + 2) % 3] ** 2
    return fast_speed_primitive(w[RHO], w[EN], bn, bt2, gamma)


def guarded_speed(q, d: int, gamma: float = GAMMA) -> np.ndarray:
    """``|u_d| + c_f`` using |rho| and |p| (intermediate RK stages may be
    negative; the state itself is never altered)."""
    q = np.asarray(q, dtype=float)
    rho = np.abs(q[RHO])
    m2 = q[MX] ** 2 + q[MX + 1] ** 2 + q[MX + 2] ** 2
    b2 = q[BX] ** 2 + q[BX + 1] ** 2 + q[BX + 2] ** 2
    p = np.abs((gamma - 1.0) * (q[EN] - 0.5 * m2 / rho - 0.5 * b2))
    bn = q[BX + d]
    bt2 = q[BX + (d + 1) % 3] ** 2 + q[BX + (d + 2) % 3] ** 2
    return np.abs(q[MX + d]) / rho + fast_speed_primitive(rho, p, bn, bt2, gamma)


def global_alpha(field, d: int, gamma: float = GAMMA) -> float:
    """Global Lax-Friedrichs coefficient ``max(|u_d| + c_f,d)`` over the
    padded field (ghost points are copies or images of interior data)."""
    data = field.data if hasattr(field, "data") else np.asarray(field)
    return float(np.max(guarded_speed(data, d, gamma)))


# ---------------------------------------------------------------------------
# scalar kernels shared with the WENO flux builder
# ---------------------------------------------------------------------------

@njit(cache=True)
def x_flux_point(q, gamma, f):
    rho = q[0]
    u = q[1] / rho
    v = q[2] / rho
    w = q[3] / rho
    bx = q[5]
    by = q[6]
    bz = q[7]
    b2 = bx * bx + by * by + bz * bz
    p = (gamma - 1.0) * (q[4] - 0.5 * rho * (u * u + v * v + w * w) - 0.5 * b2)
    ptot = p + 0.5 * b2
    udotb = u * bx + v * by + w * bz
    f[0] = q[1]
    f[1] = q[1] * u + ptot - bx * bx
    f[2] = q[1] * v - bx * by
    f[3] = q[1] * w - bx * bz
    f[4] = u * (q[4] + ptot) - bx * udotb
    f[5] = 0.0
    f[6] = u * by - v * bx
    f[7] = u * bz - w * bx


@njit(cache=True)
def x_eigensystem(q, gamma, left, right, lam):
    """Conservative-variable eigenvectors of the x-flux Jacobian at ``q``.

    ``left`` and ``right`` are (7, 7); rows of ``left`` and columns of
    ``right`` are ordered u-cf, u-ca, u-cs, u, u+cs, u+ca, u+cf.  Density and
    pressure enter through their absolute values.
    """
    rho = abs(q[0])
    if rho < 1e-300:
        rho = 1e-300
    u = q[1] / rho
    v = q[2] / rho
    w = q[3] / rho
    bx = q[5]
    by = q[6]
    bz = q[7]
    bt2 = by * by + bz * bz
    b2 = bx * bx + bt2
    vv = u * u + v * v + w * w
    p = abs((gamma - 1.0) * (q[4] - 0.5 * rho * vv - 0.5 * b2))
    sr = math.sqrt(rho)

    a2 = gamma * p / rho
    floor = 1e-12 * (vv + b2 / rho) + 1e-200
    if a2 < floor:
        a2 = floor
    a = math.sqrt(a2)
    bxr2 = bx * bx / rho
    btr2 = bt2 / rho
    s = a2 + bxr2 + btr2
    dd = a2 - bxr2 - btr2
    # s^2 - 4 a^2 bx^2/rho written without cancellation
    disc = math.sqrt((a2 - bxr2) ** 2 + btr2 * (2.0 * (a2 + bxr2) + btr2))
    cf2 = 0.5 * (s + disc)
    cs2 = a2 * bxr2 / cf2
    cf = math.sqrt(cf2)
    cs = math.sqrt(cs2)
    ca = math.sqrt(bxr2)

    # Roe-Balsara normalisation; (a2 - cs2) (cf2 - a2) = a2 btr2, so the
    # smaller factor is recovered from the larger one
    if disc > 0.0:
        if dd >= 0.0:
            fa = 0.5 * (dd + disc)
            sa = a2 * btr2 / fa if fa > 0.0 else 0.0
        else:
            sa = 0.5 * (disc - dd)
            fa = a2 * btr2 / sa
        af2 = min(max(fa / disc, 0.0), 1.0)
        as2 = min(max(sa / disc, 0.0), 1.0)
        nrm = af2 + as2
        af = math.sqrt(af2 / nrm)
        als = math.sqrt(as2 / nrm)
    else:
        af = 1.0
        als = 0.0
    bt = math.sqrt(bt2)
    if bt > 1e-12 * math.sqrt(b2 + rho * a2):
        by_ = by / bt
        bz_ = bz / bt
    else:
        by_ = 1.0 / math.sqrt(2.0)
        bz_ = 1.0 / math.sqrt(2.0)
    sg = 1.0 if bx >= 0.0 else -1.0

    lam[0] = u - cf
    lam[1] = u - ca
    lam[2] = u - cs
    lam[3] = u
    lam[4] = u + cs
    lam[5] = u + ca
    lam[6] = u + cf

    # primitive eigenvectors, variables (rho, u, v, w, p, By, Bz)
    rp = np.zeros((7, 7))
    lp = np.zeros((7, 7))
    rhoa2 = rho * a2
    n2 = 0.5 / a2
    for k, sig in ((0, -1.0), (6, 1.0)):
        rp[0, k] = rho * af
        rp[1, k] = sig * af * cf
        rp[2, k] = -sig * als * cs * by_ * sg
        rp[3, k] = -sig * als * cs * bz_ * sg
        rp[4, k] = rhoa2 * af
        rp[5, k] = sr * a * als * by_
        rp[6, k] = sr * a * als * bz_
        lp[k, 1] = sig * af * cf * n2
        lp[k, 2] = -sig * als * cs * by_ * sg * n2
        lp[k, 3] = -sig * als * cs * bz_ * sg * n2
        lp[k, 4] = af * n2 / rho
        lp[k, 5] = als * by_ * 0.5 / (sr * a)
        lp[k, 6] = als * bz_ * 0.5 / (sr * a)
    for k, sig in ((2, -1.0), (4, 1.0)):
        rp[0, k] = rho * als
        rp[1, k] = sig * als * cs
        rp[2, k] = sig * af * cf * by_ * sg
        rp[3, k] = sig * af * cf * bz_ * sg
        rp[4, k] = rhoa2 * als
        rp[5, k] = -sr * a * af * by_
        rp[6, k] = -sr * a * af * bz_
        lp[k, 1] = sig * als * cs * n2
        lp[k, 2] = sig * af * cf * by_ * sg * n2
        lp[k, 3] = sig * af * cf * bz_ * sg * n2
        lp[k, 4] = als * n2 / rho
        lp[k, 5] = -af * by_ * 0.5 / (sr * a)
        lp[k, 6] = -af * bz_ * 0.5 / (sr * a)
    for k, sig in ((1, -1.0), (5, 1.0)):
        rp[2, k] = -bz_
        rp[3, k] = by_
        rp[5, k] = sig * sr * sg * bz_
        rp[6, k] = -sig * sr * sg * by_
        lp[k, 2] = -0.5 * bz_
        lp[k, 3] = 0.5 * by_
        lp[k, 5] = 0.5 * sig * sg * bz_ / sr
        lp[k, 6] = -0.5 * sig * sg * by_ / sr
    rp[0, 3] = 1.0
    lp[3, 0] = 1.0
    lp[3, 4] = -1.0 / a2

    # right = dq/dw * rp ; left = lp * dw/dq
    g1 = gamma - 1.0
    for k in range(7):
        r0 = rp[0, k]
        r1 = rp[1, k]
        r2 = rp[2, k]
        r3 = rp[3, k]
        r4 = rp[4, k]
        r5 = rp[5, k]
        r6 = rp[6, k]
        right[0, k] = r0
        right[1, k] = u * r0 + rho * r1
        right[2, k] = v * r0 + rho * r2
        right[3, k] = w * r0 + rho * r3
        right[4, k] = 0.5 * vv * r0 + rho * (u * r1 + v * r2 + w * r3) + r4 / g1 + by * r5 + bz * r6
        right[5, k] = r5
        right[6, k] = r6
    for k in range(7):
        l0 = lp[k, 0]
        l1 = lp[k, 1]
        l2 = lp[k, 2]
        l3 = lp[k, 3]
        l4 = lp[k, 4]
        l5 = lp[k, 5]
        l6 = lp[k, 6]
        left[k, 0] = l0 - (u * l1 + v * l2 + w * l3) / rho + 0.5 * g1 * vv * l4
        left[k, 1] = l1 / rho - g1 * u * l4
        left[k, 2] = l2 / rho - g1 * v * l4
        left[k, 3] = l3 / rho - g1 * w * l4
        left[k, 4] = g1 * l4
        left[k, 5] = l5 - g1 * by * l4
        left[k, 6] = l6 - g1 * bz * l4


def eigensystem(qL, qR, d: int = 0, gamma: float = GAMMA):
    """Eigensystem at the arithmetic mean of ``qL`` and ``qR`` along axis ``d``.

    Returns ``(left, right, lam)`` acting on the seven characteristic
    variables of the rotated frame, i.e. ``rotate(q, d)[CHAR]``.
    """
    qm = 0.5 * (np.asarray(qL, dtype=float) + np.asarray(qR, dtype=float))
    left = np.empty((NCHAR, NCHAR))
    right = np.empty((NCHAR, NCHAR))
    lam = np.empty(NCHAR)
    x_eigensystem(np.ascontiguousarray(rotate(qm, d)), gamma, left, right, lam)
    return left, right, lam


__all__ = [
    "PERM", "CHAR", "NCHAR", "NVAR", "rotate", "unrotate", "physical_flux",
    "fast_speed", "fast_speed_primitive", "guarded_speed", "global_alpha",
    "eigensystem", "x_flux_point", "x_eigensystem",
]
