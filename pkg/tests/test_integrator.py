import math

import numpy as np
import pytest

from ppmhd.ct import CtOptions
from ppmhd.flux import global_alpha
from ppmhd.integrator import SolverConfig, advance_to, compute_dt, ssp_rk3_step
from ppmhd.problems import get_problem
from ppmhd.state import EN, PERIODIC, Boundary, FieldArray, Grid
from ppmhd.weno import build_interface_fluxes, flux_divergence


def _uniform(grid, w):
    prim = np.empty((8,) + grid.n)
    prim[:] = np.asarray(w, float).reshape((8,) + (1,) * grid.dims)
    f = FieldArray.from_primitive(grid, prim)
    Boundary((PERIODIC,) * grid.dims).fill(f.data, grid)
    return f


def _vortex(n):
    prob = get_problem("smooth-vortex")
    g = prob.grid((n, n))
    f = prob.initial_field(g)
    bc = prob.boundary(g)
    bc.fill(f.data, g)
    return prob, g, f, bc


def test_compute_dt_uniform_examples():
    g1 = Grid((10,), (0.0,), (1.0,))
    f = _uniform(g1, [1, 0, 0, 0, 0.6, 0, 0, 0])
    # |u| + c = 1, dx = 0.1
    assert compute_dt(f, 0.5) == pytest.approx(0.05, rel=1e-14)
    g2 = Grid((10, 20), (0, 0), (1, 1))
    f2 = _uniform(g2, [1, 0, 0, 0, 0.6, 0, 0, 0])
    assert compute_dt(f2, 0.5) == pytest.approx(0.5 / (10 + 20), rel=1e-14)


def test_compute_dt_decreases_with_speed():
    g = Grid((10,), (0.0,), (1.0,))
    dts = [compute_dt(_uniform(g, [1, u, 0, 0, 0.6, 0, 0, 0])) for u in (0.0, 1.0, 5.0)]
    assert dts[0] > dts[1] > dts[2]
    with pytest.raises(ValueError):
        compute_dt(_uniform(g, [1, 0, 0, 0, 0.6, 0, 0, 0]), 0.6)


def test_compute_dt_zero_speed_is_error():
    g = Grid((10,), (0.0,), (1.0,))
    f = _uniform(g, [1, 0, 0, 0, 0.6, 0, 0, 0])
    f.data[EN] = 0.0
    f.data[EN] += 0.0
    with pytest.raises(ValueError):
        compute_dt(f)


def test_constant_state_is_preserved():
    g = Grid((12, 10), (0, 0), (1, 1))
    f = _uniform(g, [1.3, 0.4, -0.2, 0.1, 0.9, 0.5, 0.3, -0.7])
    bc = Boundary((PERIODIC, PERIODIC))
    new, _, info = ssp_rk3_step(f, compute_dt(f), True, bc=bc)
    assert np.allclose(new.interior, f.interior, rtol=1e-13, atol=1e-13)
    assert info.stats.limited == 0


def _stage_oracle(f, dt, bc):
    """Classical Shu-Osher SSP-RK3 with the same spatial operator."""
    g = f.grid

    def L(q):
        F = [build_interface_fluxes(q, d, global_alpha(q, d)) for d in range(g.dims)]
        return -flux_divergence(F, g)

    def stage(base_int):
        s = f.copy()
        s.interior[...] = base_int
        bc.fill(s.data, g)
        return s

    qn = f.interior
    q1 = stage(qn + dt * L(f))
    q2 = stage(0.75 * qn + 0.25 * (q1.interior + dt * L(q1)))
    return qn / 3.0 + 2.0 / 3.0 * (q2.interior + dt * L(q2))


def test_accumulated_flux_matches_stagewise():
    _, g, f, bc = _vortex(24)
    dt = compute_dt(f)
    new, _, _ = ssp_rk3_step(f, dt, False, bc=bc)
    ref = _stage_oracle(f, dt, bc)
    scale = np.maximum(np.max(np.abs(f.interior), axis=(1, 2), keepdims=True), 1.0)
    assert np.max(np.abs(new.interior - ref) / scale) < 1e-13


def test_zero_length_run_is_identity():
    prob, g, f, bc = _vortex(16)
    res = advance_to(f, 0.0, 0.0, SolverConfig(), bc)
    assert res.steps == 0 and np.array_equal(res.field.data, f.data)


@pytest.mark.parametrize("ct", [False, True])
def test_two_halves_compose(ct):
    prob, g, f, bc = _vortex(16)
    A = prob.initial_potential(g)
    cfg = SolverConfig(ct=CtOptions() if ct else None)
    dt = 0.5 * compute_dt(f)
    whole = advance_to(f, 0.0, 4 * dt, cfg, bc, A, fixed_dt=dt)
    h1 = advance_to(f, 0.0, 2 * dt, cfg, bc, A, fixed_dt=dt)
    h2 = advance_to(h1.field, 2 * dt, 4 * dt, cfg, bc, h1.potential, fixed_dt=dt)
    assert np.array_equal(whole.field.interior, h2.field.interior)
    assert whole.steps == h1.steps + h2.steps == 4


def test_run_lands_on_final_time():
    prob, g, f, bc = _vortex(16)
    res = advance_to(f, 0.0, 0.0123, SolverConfig(), bc)
    assert res.t == 0.0123 and res.records[-1].time == 0.0123
    assert sum(r.dt for r in res.records) == pytest.approx(0.0123, rel=1e-12)


def test_periodic_conservation():
    prob, g, f, bc = _vortex(24)
    res = advance_to(f, 0.0, 0.02, SolverConfig(limiter=True), bc)
    s0 = np.sum(f.interior, axis=(1, 2))
    s1 = np.sum(res.field.interior, axis=(1, 2))
    scale = np.maximum(np.sum(np.abs(f.interior), axis=(1, 2)), 1.0)
    assert np.all(np.abs(s1 - s0) <= 1e-14 * scale * g.n[0] * g.n[1])
    assert abs(res.records[-1].energy_drift) < 1e-13


def test_limiter_is_local_to_the_vacuum_interface():
    prob = get_problem("vacuum-shock-1d")
    g = prob.grid((100,))
    f = prob.initial_field(g)
    bc = prob.boundary(g)
    bc.fill(f.data, g)
    dt = compute_dt(f)
    a, _, info = ssp_rk3_step(f, dt, True, bc=bc)
    b, _, _ = ssp_rk3_step(f, dt, False, bc=bc)
    assert info.stats.limited > 0
    (x,) = g.coords(ghosts=False)
    far = np.abs(x) > 0.1
    assert np.array_equal(a.interior[:, far], b.interior[:, far])


def test_ct_keeps_divergence_at_roundoff():
    prob, g, f, bc = _vortex(24)
    A = prob.initial_potential(g)
    res = advance_to(f, 0.0, 0.02, SolverConfig(ct=CtOptions()), bc, A)
    assert max(r.div_l1 for r in res.records) < 1e-10
    assert res.positive and not res.aborted


def test_ct_requires_potential():
    prob, g, f, bc = _vortex(16)
    with pytest.raises(ValueError):
        advance_to(f, 0.0, 0.01, SolverConfig(ct=CtOptions()), bc)


def test_negative_final_time_rejected():
    prob, g, f, bc = _vortex(16)
    with pytest.raises(ValueError):
        advance_to(f, 1.0, 0.5, SolverConfig(), bc)


def test_unlimited_vacuum_tube_goes_negative_and_limited_does_not():
    prob = get_problem("vacuum-shock-1d")
    g = prob.grid((100,))
    f = prob.initial_field(g)
    bc = prob.boundary(g)
    off = advance_to(f, 0.0, 0.01, SolverConfig(limiter=False), bc, stop_on_negative=True)
    assert not off.positive and off.first_negative_time is not None
    on = advance_to(f, 0.0, 0.01, SolverConfig(limiter=True), bc)
    assert on.positive and not on.aborted
    assert math.isclose(on.t, 0.01)
