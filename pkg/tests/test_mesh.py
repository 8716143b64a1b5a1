import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deadoil.mesh import (Grid2D, GridMismatchError, div_coeff_grad, div_coeff_grad_coeff_T,
                          dot_grad, face_coefficient, face_coefficient_T, inner,
                          integrate_power, laplacian, norm, read_field, write_field)


def test_spacing_and_nodes():
    g = Grid2D(4, 5, 2.0, 1.0)
    assert g.hx == 0.5 and g.hy == 0.2
    assert g.shape == (3, 4)
    assert g.node(1, 1) == (0.5, 0.2)
    x, y = g.coords()
    assert x[-1, 0] == pytest.approx(1.5) and y[0, -1] == pytest.approx(0.8)


@pytest.mark.parametrize("args", [(1, 4), (4, 1), (4, 4, 0.0, 1.0), (4, 4, 1.0, -1.0)])
def test_rejects_degenerate(args):
    with pytest.raises(ValueError):
        Grid2D(*args)


def test_shape_mismatch_is_reported():
    g = Grid2D(5, 5)
    with pytest.raises(GridMismatchError):
        laplacian(g, np.zeros((3, 3)))


@pytest.mark.parametrize("kx,ky", [(1, 1), (2, 3), (5, 1)])
def test_laplacian_sine_eigenvalue(kx, ky):
    g = Grid2D(12, 9, 1.0, 2.0)
    v = g.sine_mode(kx, ky)
    np.testing.assert_allclose(laplacian(g, v), g.laplacian_eigenvalue(kx, ky) * v,
                               atol=1e-10 * abs(g.laplacian_eigenvalue(kx, ky)))


def test_constant_coefficient_scales_laplacian(rng):
    g = Grid2D(9, 7)
    v = rng.standard_normal(g.shape)
    np.testing.assert_allclose(div_coeff_grad(g, 2.5, v), 2.5 * laplacian(g, v),
                               rtol=1e-13, atol=1e-10)
    np.testing.assert_allclose(div_coeff_grad(g, g.full(2.5), v, 2.5),
                               2.5 * laplacian(g, v), rtol=1e-13, atol=1e-10)


@pytest.mark.parametrize("boundary", [None, 1.3])
def test_div_coeff_grad_symmetric_negative_semidefinite(rng, boundary):
    g = Grid2D(11, 8, 1.0, 0.7)
    a = 1.0 + rng.uniform(0, 1, g.shape)
    A = np.column_stack([div_coeff_grad(g, a, e.reshape(g.shape), boundary).ravel()
                         for e in np.eye(g.size)])
    np.testing.assert_allclose(A, A.T, atol=1e-10 * np.abs(A).max())
    assert np.linalg.eigvalsh(0.5 * (A + A.T)).max() < 0


@given(seed=st.integers(0, 2**32 - 1), nx=st.integers(3, 9), ny=st.integers(3, 9))
@settings(max_examples=30, deadline=None)
def test_energy_identity(seed, nx, ny):
    # <div(a grad v), v> = -sum a_face |grad v|^2 <= 0 for positive a
    r = np.random.default_rng(seed)
    g = Grid2D(nx, ny)
    a = r.uniform(0.5, 2.0, g.shape)
    v = r.standard_normal(g.shape)
    assert inner(g, div_coeff_grad(g, a, v, 1.0), v) <= 1e-12


@pytest.mark.parametrize("extrapolate", [False, True])
def test_coeff_transpose(rng, extrapolate):
    g = Grid2D(7, 6)
    v, lam, da = (rng.standard_normal(g.shape) for _ in range(3))
    bnd = None if extrapolate else 0.0
    lhs = np.sum(div_coeff_grad(g, da, v, bnd) * lam)
    rhs = np.sum(da * div_coeff_grad_coeff_T(g, v, lam, extrapolate))
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("axis", [0, 1])
@pytest.mark.parametrize("extrapolate", [False, True])
def test_face_coefficient_transpose(rng, axis, extrapolate):
    a = rng.standard_normal((5, 4))
    bnd = None if extrapolate else 0.0
    c = face_coefficient(a, axis, bnd)
    lam = rng.standard_normal(c.shape)
    assert np.sum(c * lam) == pytest.approx(
        np.sum(a * face_coefficient_T(lam, axis, extrapolate)), rel=1e-12)


def test_second_order_with_variable_coefficient():
    errs = []
    for n in (16, 32, 64):
        g = Grid2D(n, n)
        x, y = g.coords()
        a = 1 + x * y
        v = np.sin(np.pi * x) * np.sin(np.pi * y)
        exact = (np.pi * y * np.cos(np.pi * x) * np.sin(np.pi * y)
                 + np.pi * x * np.sin(np.pi * x) * np.cos(np.pi * y)
                 - 2 * np.pi**2 * a * v)
        errs.append(np.abs(div_coeff_grad(g, a, v) - exact).max())
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(np.abs(orders - 2) < 0.2)


def test_dot_grad_exact_for_quadratic_bubble():
    # central differences are exact for fields quadratic along each axis
    g = Grid2D(10, 8)
    x, y = g.coords()
    b = x * (1 - x) * y * (1 - y)
    bx, by = (1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)
    np.testing.assert_allclose(dot_grad(g, b, b), bx**2 + by**2, atol=1e-14)


def test_integrate_power_and_norm():
    g = Grid2D(4, 4)
    v = g.full(-2.0)
    assert integrate_power(g, v, 2) == pytest.approx(9 * 4 / 16)
    assert norm(g, v) == pytest.approx(np.sqrt(9 * 4 / 16))
    with pytest.raises(ValueError):
        integrate_power(g, v, 0.5)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_csv_round_trip_is_bitwise(tmp_path_factory, seed):
    r = np.random.default_rng(seed)
    g = Grid2D(6, 5, 1.0, 3.0)
    v = r.standard_normal(g.shape) * 10.0 ** r.integers(-300, 300, g.shape)
    path = tmp_path_factory.mktemp("rt") / "v.csv"
    write_field(path, g, v)
    back = read_field(path, g)
    assert back.tobytes() == v.tobytes()


def test_read_field_rejects_wrong_grid(tmp_path):
    g = Grid2D(6, 5)
    write_field(tmp_path / "v.csv", g, g.zeros())
    with pytest.raises(ValueError):
        read_field(tmp_path / "v.csv", Grid2D(5, 6))
