"""Brute-force oracles shared by the limiter unit and acceptance tests."""

import numpy as np

from ppmhd.flux import physical_flux
from ppmhd.limiter import EpsilonBounds, cell_bounds
from ppmhd.state import EN, GAMMA, RHO, to_conserved


def pressure_rows(q, gamma=GAMMA):
    """Pressure of states stored along the last axis."""
    rho = q[..., 0]
    kin = 0.5 * np.sum(q[..., 1:4] ** 2, axis=-1) / rho
    mag = 0.5 * np.sum(q[..., 5:8] ** 2, axis=-1)
    return (gamma - 1.0) * (q[..., 4] - kin - mag)


def random_cells(rng, ncell, nf):
    """Admissible first-order states and unlimited face contributions."""
    rho = 10.0 ** rng.uniform(-8, 0.5, ncell)
    p = 10.0 ** rng.uniform(-8, 0.5, ncell)
    w = np.zeros((8, ncell))
    w[RHO] = rho
    w[1:4] = rng.normal(0, 1, (3, ncell))
    w[EN] = p
    w[5:8] = rng.normal(0, 1, (3, ncell)) * 10.0 ** rng.uniform(-4, 0.5, ncell)
    ql = to_conserved(w).T.copy()
    scale = np.abs(ql)[:, None, :] + 1e-3 * np.abs(ql).max(axis=1)[:, None, None]
    C = rng.normal(0, 1, (ncell, nf, 8)) * scale * 10.0 ** rng.uniform(-2, 0.7, (ncell, 1, 1))
    return ql, C


def box_violations(rng, ncell, nsample, nf_choices=(2, 4, 6), eps0=1e-13, gamma=GAMMA):
    """Sample theta in each returned box and count bound violations."""
    bad = 0
    for nf in nf_choices:
        ql, C = random_cells(rng, ncell // len(nf_choices), nf)
        eps = EpsilonBounds(min(eps0, ql[:, 0].min()), min(eps0, pressure_rows(ql, gamma).min()), eps0)
        lam_rho, lam = cell_bounds(ql, C, eps, gamma)
        assert np.all(lam <= lam_rho + 1e-15) and np.all(lam >= 0) and np.all(lam_rho <= 1)
        theta = rng.uniform(0, 1, (ql.shape[0], nsample, nf)) * lam[:, None, :]
        # include the box corners themselves
        theta[:, 0] = lam
        q = ql[:, None, :] + np.einsum("csf,cfk->csk", theta, C)
        # round-off allowance: a few ulps of the magnitudes being summed
        mag = np.abs(ql)[:, None, :] + np.einsum("csf,cfk->csk", theta, np.abs(C))
        bad += int(np.count_nonzero(q[..., 0] < eps.eps_rho - 1e-14 * mag[..., 0]))
        bad += int(np.count_nonzero(pressure_rows(q, gamma) < eps.eps_p - 1e-13 * (mag[..., 4] + 1.0)))
    return bad


def random_riemann_lf_positivity(rng, count, cfl=0.5, gamma=GAMMA):
    """One LF forward-Euler step on random admissible 3-cell problems.

    Returns the smallest density and pressure of the updated middle cells.
    """
    w = np.zeros((8, count, 3))
    w[RHO] = 10.0 ** rng.uniform(-6, 1, (count, 3))
    w[1:4] = rng.normal(0, 2, (3, count, 3))
    w[EN] = 10.0 ** rng.uniform(-6, 1, (count, 3))
    w[5] = rng.normal(0, 2, (count, 1))  # normal field is constant in 1D
    w[6:8] = rng.normal(0, 2, (2, count, 3))
    q = to_conserved(w)
    from ppmhd.flux import guarded_speed
    alpha = guarded_speed(q, 0).max(axis=-1)
    f = physical_flux(q, 0)
    fl = 0.5 * (f[..., :2] + f[..., 1:] - alpha[:, None] * (q[..., 1:] - q[..., :2]))
    lam = cfl / alpha
    mid = q[..., 1] - lam * (fl[..., 1] - fl[..., 0])
    return float(mid[RHO].min()), float(pressure_rows(mid.T, gamma).min())
