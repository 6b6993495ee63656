import numpy as np
import pytest

from dispersia.fieldkit import make_grid
from dispersia.initial_data import (
    DataError,
    bbm_solitary,
    build_initial_data,
    kdv_soliton,
    rough_left,
    smooth_window,
)

WINDOW = {"start": -60.0, "stop": -2.0, "ramp": 8.0}
BAND = {"k_min": 1.0, "k_max": 6.0}


def test_soliton_profiles():
    assert kdv_soliton(0.0, 2.0) == pytest.approx(6.0)
    assert bbm_solitary(0.0, 1.5) == pytest.approx(1.5)
    with pytest.raises(DataError):
        bbm_solitary(0.0, 1.0)


def test_kdv_soliton_solves_travelling_wave_ode():
    # u_xxx - c u_x + u u_x = 0 checked by finite differences
    x = np.linspace(-10, 10, 20001)
    h = x[1] - x[0]
    u = kdv_soliton(x, 1.3)
    ux = np.gradient(u, h)
    uxxx = np.gradient(np.gradient(ux, h), h)
    resid = uxxx - 1.3 * ux + u * ux
    assert np.max(np.abs(resid[10:-10])) < 1e-4


def test_smooth_window():
    x = np.linspace(-70, 10, 8001)
    w = smooth_window(x, **WINDOW)
    assert np.all(w[(x <= -60) | (x >= -2)] == 0)
    assert np.allclose(w[(x >= -52) & (x <= -10)], 1.0)
    assert np.all((w >= 0) & (w <= 1))


def test_rough_left_is_grid_independent():
    a = rough_left(make_grid(2048, 400.0, -200.0), 1.2, 0.5, WINDOW, BAND, seed=3)
    b = rough_left(make_grid(4096, 400.0, -200.0), 1.2, 0.5, WINDOW, BAND, seed=3)
    assert np.allclose(a.values, b.values[::2], atol=1e-12)
    assert np.all(a.values[np.asarray(a.grid.x) >= -2.0] == 0)
    assert a.max_abs() <= 0.5 + 1e-12


def test_rough_left_rejects_bad_band():
    grid = make_grid(256, 400.0, -200.0)
    with pytest.raises(DataError):
        rough_left(grid, 1.2, 0.5, WINDOW, BAND, seed=0)
    grid = make_grid(4096, 400.0, -200.0)
    with pytest.raises(DataError):
        rough_left(grid, 1.2, 0.5, {**WINDOW, "stop": 1.0}, BAND, seed=0)
    with pytest.raises(DataError):
        rough_left(grid, 1.2, 0.5, WINDOW, {"k_min": 0.0, "k_max": 1.0}, seed=0)


def test_build_composite_and_unknown():
    grid = make_grid(256, 40.0, -20.0)
    spec = {
        "kind": "composite",
        "parts": [
            {"kind": "closed_form", "name": "constant", "params": {"value": 1.0}},
            {"kind": "closed_form", "name": "cosine", "params": {"amplitude": 2.0, "wavenumber": 0.0}},
        ],
    }
    assert np.allclose(build_initial_data(grid, spec).values, 3.0)
    with pytest.raises(DataError):
        build_initial_data(grid, {"kind": "mystery"})
    with pytest.raises(DataError):
        build_initial_data(grid, {"kind": "closed_form", "name": "mystery"})


def test_peakon_data():
    grid = make_grid(400, 40.0, -20.0)
    u = build_initial_data(grid, {"kind": "peakons", "positions": [0.0], "amplitudes": [2.0]})
    assert u.values[grid.index_of(0.0)] == pytest.approx(2.0)
