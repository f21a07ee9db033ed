"""Fifth-order finite-difference WENO fluxes with characteristic projection.

``build_interface_fluxes`` returns, for one sweep direction, the numerical
flux at every interface bounding an interior point: an array shaped like the
interior but one longer along the sweep axis.  Entry ``k`` along that axis is
the flux at the left face of interior point ``k``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .flux import CHAR, NCHAR, PERM, x_eigensystem, x_flux_point
from .state import GAMMA, NVAR

WENO_EPS = 1e-6


def _weno5(v0, v1, v2, v3, v4):
    b0 = 13.0 / 12.0 * (v0 - 2.0 * v1 + v2) ** 2 + 0.25 * (v0 - 4.0 * v1 + 3.0 * v2) ** 2
    b1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - v3) ** 2
    b2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (3.0 * v2 - 4.0 * v3 + v4) ** 2
    a0 = 0.1 / (WENO_EPS + b0) ** 2
    a1 = 0.6 / (WENO_EPS + b1) ** 2
    a2 = 0.3 / (WENO_EPS + b2) ** 2
    p0 = (2.0 * v0 - 7.0 * v1 + 11.0 * v2) / 6.0
    p1 = (-v1 + 5.0 * v2 + 2.0 * v3) / 6.0
    p2 = (2.0 * v2 + 5.0 * v3 - v4) / 6.0
    return (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2)


_weno5_jit = njit(cache=True, inline="always")(_weno5)


def weno5_reconstruct(stencil, bias: int = 1):
    """Interface value from five point values.

    ``bias=+1`` reconstructs at the right face of the middle point from the
    left-biased stencil (v[i-2], ..., v[i+2]); ``bias=-1`` reads the stencil
    mirrored, i.e. reconstructs at the left face of the middle point.
    Works element-wise when the entries are arrays.
    """
    v = list(stencil)
    if len(v) != 5:
        raise ValueError("WENO5 needs exactly five values")
    if bias < 0:
        v = v[::-1]
    return _weno5(*v)


@njit(cache=True)
def _char_flux_lines(q, alpha, gamma, g):
    nl = q.shape[1]
    npad = q.shape[2]
    n = npad - 2 * g
    out = np.empty((8, nl, n + 1))
    f = np.empty((8, npad))
    qp = np.empty(8)
    fp = np.empty(8)
    qm = np.empty(8)
    left = np.empty((7, 7))
    right = np.empty((7, 7))
    lam = np.empty(7)
    lf = np.empty((7, 6))
    lq = np.empty((7, 6))
    hsum = np.empty(7)
    ch = np.array([0, 1, 2, 3, 4, 6, 7])
    for line in range(nl):
        for j in range(npad):
            for c in range(8):
                qp[c] = q[c, line, j]
            x_flux_point(qp, gamma, fp)
            for c in range(8):
                f[c, j] = fp[c]
        for k in range(n + 1):
            i = g - 1 + k
            for c in range(8):
                qm[c] = 0.5 * (q[c, line, i] + q[c, line, i + 1])
            x_eigensystem(qm, gamma, left, right, lam)
            for m in range(7):
                for s in range(6):
                    j = i - 2 + s
                    accf = 0.0
                    accq = 0.0
                    for c in range(7):
                        lmc = left[m, c]
                        accf += lmc * f[ch[c], j]
                        accq += lmc * q[ch[c], line, j]
                    lf[m, s] = accf
                    lq[m, s] = accq
            for m in range(7):
                hp = _weno5_jit(
                    0.5 * (lf[m, 0] + alpha * lq[m, 0]),
                    0.5 * (lf[m, 1] + alpha * lq[m, 1]),
                    0.5 * (lf[m, 2] + alpha * lq[m, 2]),
                    0.5 * (lf[m, 3] + alpha * lq[m, 3]),
                    0.5 * (lf[m, 4] + alpha * lq[m, 4]),
                )
                hm = _weno5_jit(
                    0.5 * (lf[m, 5] - alpha * lq[m, 5]),
                    0.5 * (lf[m, 4] - alpha * lq[m, 4]),
                    0.5 * (lf[m, 3] - alpha * lq[m, 3]),
                    0.5 * (lf[m, 2] - alpha * lq[m, 2]),
                    0.5 * (lf[m, 1] - alpha * lq[m, 1]),
                )
                hsum[m] = hp + hm
            for c in range(7):
                acc = 0.0
                for m in range(7):
                    acc += right[c, m] * hsum[m]
                out[ch[c], line, k] = acc
            # normal field: zero physical flux, split part reconstructed as is
            hb = 0.5 * alpha
            out[5, line, k] = _weno5_jit(
                hb * q[5, line, i - 2], hb * q[5, line, i - 1], hb * q[5, line, i],
                hb * q[5, line, i + 1], hb * q[5, line, i + 2],
            ) + _weno5_jit(
                -hb * q[5, line, i + 3], -hb * q[5, line, i + 2], -hb * q[5, line, i + 1],
                -hb * q[5, line, i], -hb * q[5, line, i - 1],
            )
    return out


class NonFiniteStateError(FloatingPointError):
    """A state entering the flux builder contains NaN or inf."""


def _sweep_view(data: np.ndarray, grid, d: int) -> np.ndarray:
    """Rotated components, interior transverse range, sweep axis last."""
    idx = [slice(None)] + list(grid.interior)
    idx[d + 1] = slice(None)
    q = data[PERM[d]][tuple(idx)]
    return np.moveaxis(q, d + 1, -1)


def _unsweep(out: np.ndarray, d: int) -> np.ndarray:
    res = np.empty_like(out)
    res[PERM[d]] = out
    return np.moveaxis(res, -1, d + 1)


def check_finite(data: np.ndarray) -> None:
    if not np.all(np.isfinite(data)):
        bad = np.argwhere(~np.isfinite(data))[0]
        raise NonFiniteStateError(f"non-finite value at component {bad[0]}, index {tuple(bad[1:])}")


def build_interface_fluxes(field, d: int, alpha: float, gamma: float = GAMMA) -> np.ndarray:
    """WENO5 characteristic-wise fluxes along axis ``d`` with global
    Lax-Friedrichs splitting ``f +- alpha q``."""
    grid = field.grid
    check_finite(field.data)
    q = _sweep_view(field.data, grid, d)
    tshape = q.shape[1:-1]
    q2 = np.ascontiguousarray(q.reshape(NVAR, -1, q.shape[-1]))
    out = _char_flux_lines(q2, float(alpha), float(gamma), grid.ghost)
    out = out.reshape((NVAR,) + tshape + (out.shape[-1],))
    if grid.dims == 1:
        # 1D: the normal field is a frozen parameter, no splitting dissipation
        out[5] = 0.0
    return _unsweep(out, d)


def flux_divergence(fluxes, grid) -> np.ndarray:
    """Sum over directions of ``(F[k+1] - F[k]) / dx``, interior-shaped."""
    div = np.zeros((NVAR,) + grid.n)
    for d, F in enumerate(fluxes):
        hi = [slice(None)] * F.ndim
        lo = [slice(None)] * F.ndim
        hi[d + 1] = slice(1, None)
        lo[d + 1] = slice(None, -1)
        div += (F[tuple(hi)] - F[tuple(lo)]) / grid.dx[d]
    return div


def scalar_weno_derivative(values: np.ndarray, grid, d: int, wind) -> np.ndarray:
    """Upwind WENO5 approximation of d(values)/dx_d at interior points.

    ``values`` lives on the padded grid; ``wind`` (interior-shaped or scalar)
    selects the left-biased stencil where it is >= 0 and the right-biased one
    elsewhere.
    """
    g = grid.ghost
    n = grid.n[d]
    h = grid.dx[d]
    idx = list(grid.interior)
    idx[d] = slice(None)
    a = np.moveaxis(values[tuple(idx)], d, -1)
    D = (a[..., 1:] - a[..., :-1]) / h  # D[j] = (a[j+1] - a[j]) / h

    def sh(k):
        return D[..., g + k: g + k + n]

    minus = _weno5(sh(-3), sh(-2), sh(-1), sh(0), sh(1))
    plus = _weno5(sh(2), sh(1), sh(0), sh(-1), sh(-2))
    wind = np.broadcast_to(np.asarray(wind, dtype=float), grid.n)
    res = np.where(np.moveaxis(wind, d, -1) >= 0.0, minus, plus)
    return np.moveaxis(res, -1, d)


__all__ = [
    "WENO_EPS", "weno5_reconstruct", "build_interface_fluxes", "flux_divergence",
    "scalar_weno_derivative", "check_finite", "NonFiniteStateError", "NCHAR", "CHAR",
]
