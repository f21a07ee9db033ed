import numpy as np
import pytest

from ppmhd.state import EN, PERIODIC, RHO, Boundary, FieldArray, Grid, to_conserved
from ppmhd.flux import global_alpha, physical_flux
from ppmhd.weno import (NonFiniteStateError, build_interface_fluxes, flux_divergence, scalar_weno_derivative,
                        weno5_reconstruct)


def test_reconstruction_exact_for_constants_and_linears():
    assert weno5_reconstruct([3.0] * 5) == pytest.approx(3.0, abs=1e-14)
    # point values of a linear function reconstruct its face value
    v = [2.0 * j + 1.0 for j in range(-2, 3)]
    assert weno5_reconstruct(v, 1) == pytest.approx(2.0 * 0.5 + 1.0, rel=1e-12)
    assert weno5_reconstruct(v, -1) == pytest.approx(2.0 * -0.5 + 1.0, rel=1e-12)


def test_reconstruction_fifth_order_on_smooth_data():
    errs = []
    for h in (0.1, 0.05, 0.025):
        x = np.arange(-2, 3) * h
        # flux-form: cell averages of sin give the derivative's primitive at the face
        avg = (np.cos(x - h / 2) - np.cos(x + h / 2)) / h
        errs.append(abs(weno5_reconstruct(avg) - np.sin(h / 2)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 4.5)


def test_reconstruction_is_nonoscillatory_at_a_step():
    v = [0.0, 0.0, 0.0, 1.0, 1.0]
    r = weno5_reconstruct(v)
    assert -1e-3 < r < 1.0 + 1e-3
    assert weno5_reconstruct([0.0, 0.0, 0.0, 0.0, 1.0]) < 1e-3


def _uniform(grid, w):
    f = FieldArray(grid)
    f.data[...] = to_conserved(np.asarray(w, float)).reshape((8,) + (1,) * grid.dims)
    return f


@pytest.mark.parametrize("n", [(12,), (8, 7), (6, 5, 4)])
def test_freestream_preservation(n):
    grid = Grid(n, (0.0,) * len(n), (1.0,) * len(n))
    w = [1.3, 0.4, -0.7, 0.2, 0.8, 0.6, -0.9, 0.3]
    f = _uniform(grid, w)
    fl = [build_interface_fluxes(f, d, global_alpha(f, d), 5 / 3) for d in range(grid.dims)]
    assert np.max(np.abs(flux_divergence(fl, grid))) <= 1e-12
    for d in range(grid.dims):
        expect = physical_flux(f.data[(slice(None),) + (0,) * grid.dims], d)
        assert np.allclose(np.moveaxis(fl[d], 0, -1), expect, rtol=1e-13, atol=1e-13)


def test_flux_shape_covers_interior_faces():
    grid = Grid((6, 5), (0, 0), (1, 1))
    f = _uniform(grid, [1, 0, 0, 0, 1, 0, 0, 0])
    assert build_interface_fluxes(f, 0, 1.0).shape == (8, 7, 5)
    assert build_interface_fluxes(f, 1, 1.0).shape == (8, 6, 6)


def test_nonfinite_input_rejected():
    grid = Grid((6,), (0,), (1,))
    f = _uniform(grid, [1, 0, 0, 0, 1, 0, 0, 0])
    f.data[EN, 5] = np.nan
    with pytest.raises(NonFiniteStateError):
        build_interface_fluxes(f, 0, 1.0)


def test_smooth_advection_converges_at_high_order():
    # density wave advected at unit speed: the spatial operator should be ~5th order
    errs = []
    for n in (20, 40, 80):
        grid = Grid((n,), (0.0,), (1.0,))
        x = grid.axis_coords(0)
        w = np.zeros((8, x.size))
        w[RHO] = 1.0 + 0.2 * np.sin(2 * np.pi * x)
        w[1] = 1.0
        w[EN] = 1.0
        f = FieldArray.from_primitive(grid, w)
        Boundary((PERIODIC,)).fill(f.data, grid)
        rhs = -flux_divergence([build_interface_fluxes(f, 0, global_alpha(f, 0))], grid)
        xi = grid.axis_coords(0, ghosts=False)
        exact = -0.2 * 2 * np.pi * np.cos(2 * np.pi * xi)
        errs.append(np.max(np.abs(rhs[RHO] - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders[-1] > 4.0


def test_scalar_derivative_upwinding_and_order():
    errs = []
    for n in (20, 40, 80):
        grid = Grid((n,), (0.0,), (1.0,))
        x = grid.axis_coords(0)
        a = np.sin(2 * np.pi * x)
        xi = grid.axis_coords(0, ghosts=False)
        d_pos = scalar_weno_derivative(a, grid, 0, 1.0)
        d_neg = scalar_weno_derivative(a, grid, 0, -1.0)
        ex = 2 * np.pi * np.cos(2 * np.pi * xi)
        errs.append(max(np.max(np.abs(d_pos - ex)), np.max(np.abs(d_neg - ex))))
    assert np.log2(errs[-2] / errs[-1]) > 4.0
    # a linear function is differentiated exactly in both wind directions
    grid = Grid((10, 6), (0, 0), (1, 1))
    X, Y = grid.coords()
    lin = 3.0 * X - 2.0 * Y
    wind = np.where(np.arange(10)[:, None] % 2 == 0, 1.0, -1.0) * np.ones(grid.n)
    assert np.allclose(scalar_weno_derivative(lin, grid, 0, wind), 3.0, atol=1e-12)
    assert np.allclose(scalar_weno_derivative(lin, grid, 1, wind), -2.0, atol=1e-12)


def test_scalar_derivative_stencil_direction():
    # a jump far upwind must not affect the downwind-biased result
    grid = Grid((10,), (0.0,), (1.0,))
    a = np.zeros(grid.shape)
    a[grid.ghost + 8:] = 1.0
    d = scalar_weno_derivative(a, grid, 0, 1.0)
    assert np.all(np.abs(d[:4]) < 1e-12)
