import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersia.fieldkit import (
    GridMismatchError,
    RealField,
    bessel_inverse,
    dealias_mask,
    dealiased_product,
    derivative_multiplier,
    inverse,
    kernel_convolve_exp,
    make_grid,
    random_bandlimited,
    sobolev_norm,
    spectral_derivative,
    transform,
)


@pytest.fixture
def grid():
    return make_grid(256, 2 * np.pi, -np.pi)


def test_grid_basics(grid):
    assert grid.dx == pytest.approx(2 * np.pi / 256)
    assert grid.x[0] == -np.pi
    assert grid.right == pytest.approx(np.pi)
    assert grid.k[1] == pytest.approx(1.0)
    assert grid.index_of(np.pi) == 0  # periodic
    assert grid.wrap(np.pi + 0.5) == pytest.approx(-np.pi + 0.5)


@pytest.mark.parametrize("n,length", [(7, 1.0), (6, 1.0), (64, 0.0), (64, -1.0)])
def test_grid_rejects_bad_input(n, length):
    with pytest.raises(ValueError):
        make_grid(n, length)


def test_field_is_immutable_and_finite(grid):
    f = RealField.zeros(grid)
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ValueError):
        RealField(grid, np.full(grid.n, np.nan))
    with pytest.raises(ValueError):
        RealField(grid, np.zeros(grid.n + 2))


def test_field_arithmetic_checks_grid(grid):
    other = make_grid(128, 2 * np.pi, -np.pi)
    with pytest.raises(GridMismatchError):
        RealField.zeros(grid) + RealField.zeros(other)
    f = RealField.from_function(grid, np.sin)
    assert np.allclose((2 * f - f).values, f.values)


def test_transform_roundtrip(grid):
    f = random_bandlimited(grid, np.random.default_rng(1))
    assert np.allclose(inverse(transform(f)).values, f.values, atol=1e-13)


def test_derivative_of_sine(grid):
    f = RealField.from_function(grid, lambda x: np.sin(3 * x))
    d = spectral_derivative(f, 1)
    assert np.max(np.abs(d.values - 3 * np.cos(3 * grid.x))) < 1e-11
    d4 = spectral_derivative(f, 4)
    assert np.max(np.abs(d4.values - 81 * np.sin(3 * grid.x))) < 1e-6


def test_odd_derivative_drops_nyquist(grid):
    assert derivative_multiplier(grid, 1)[-1] == 0
    assert derivative_multiplier(grid, 2)[-1] != 0
    nyquist = RealField(grid, np.cos(np.pi * np.arange(grid.n)))
    assert spectral_derivative(nyquist, 3).max_abs() < 1e-12


@pytest.mark.parametrize("order", [-1, 9, 1.5])
def test_derivative_order_range(grid, order):
    with pytest.raises(ValueError):
        spectral_derivative(RealField.zeros(grid), order)


def test_bessel_inverse_of_constant_and_cosine(grid):
    c = RealField(grid, np.full(grid.n, 2.5))
    assert np.allclose(bessel_inverse(c).values, 2.5)
    f = RealField.from_function(grid, lambda x: np.cos(2 * x))
    assert np.allclose(bessel_inverse(f).values, np.cos(2 * grid.x) / 5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_helmholtz_identity(seed):
    # d^2 J^{-2} f = J^{-2} f - f
    grid = make_grid(128, 30.0, -15.0)
    f = random_bandlimited(grid, np.random.default_rng(seed))
    jf = bessel_inverse(f)
    assert np.max(np.abs(spectral_derivative(jf, 2).values - (jf.values - f.values))) < 1e-10


def test_kernel_quadrature_matches_spectral_inverse():
    # independent real-space oracle for J^{-2} on data that vanishes near the edges
    grid = make_grid(2048, 80.0, -40.0)
    f = RealField.from_function(grid, lambda x: np.exp(-4 * x**2))
    a = bessel_inverse(f).values
    b = kernel_convolve_exp(f).values
    assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-6


def test_sobolev_norm_of_cosine(grid):
    f = RealField.from_function(grid, lambda x: np.cos(2 * x))
    # ||cos 2x||_2^2 = pi on a 2pi period
    assert sobolev_norm(f, 0) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert sobolev_norm(f, 1) == pytest.approx(np.sqrt(5 * np.pi), rel=1e-12)
    assert sobolev_norm(f) == pytest.approx(f.l2_norm(), rel=1e-12)
    with pytest.raises(ValueError):
        sobolev_norm(f, -1)


@settings(max_examples=25, deadline=None)
@given(s=st.floats(0, 4), t=st.floats(0, 4), seed=st.integers(0, 1000))
def test_sobolev_norm_monotone_in_s(s, t, seed):
    grid = make_grid(64, 10.0)
    f = random_bandlimited(grid, np.random.default_rng(seed))
    lo, hi = sorted((s, t))
    assert sobolev_norm(f, lo) <= sobolev_norm(f, hi) * (1 + 1e-12)


def test_dealias_mask_keeps_two_thirds(grid):
    mask = dealias_mask(grid)
    assert mask.sum() == grid.n // 3 + 1
    assert mask[0] and not mask[-1]


def test_dealiased_product_of_low_modes_is_exact(grid):
    f = RealField.from_function(grid, lambda x: np.cos(3 * x))
    g = RealField.from_function(grid, lambda x: np.sin(5 * x))
    p = dealiased_product(f, g)
    assert np.allclose(p.values, np.cos(3 * grid.x) * np.sin(5 * grid.x), atol=1e-13)


def test_integral_and_norm(grid):
    f = RealField.from_function(grid, lambda x: 1 + np.cos(x))
    assert f.integral() == pytest.approx(2 * np.pi)
    assert f.l2_norm() == pytest.approx(np.sqrt(3 * np.pi))
