import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersia.airy import (
    BlowupSchedule,
    BoundaryContactError,
    airy_propagate,
    build_blowup_data,
    corner_profile,
    heat_propagate,
    quartic_heat_propagate,
    smallness_report,
    weighted_identity,
)
from dispersia.diagnostics import locate_jumps
from dispersia.fieldkit import RealField, make_grid, random_bandlimited


@pytest.fixture
def grid():
    return make_grid(128, 2 * np.pi, -np.pi)


def test_plane_wave_is_translated(grid):
    # exp(ikx) picks up exp(ik^3 t); for k = 1 that is a shift by -t
    f = RealField.from_function(grid, np.cos)
    out = airy_propagate(f, 0.7)
    assert np.allclose(out.values, np.cos(grid.x + 0.7), atol=1e-13)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), s=st.floats(-3, 3), t=st.floats(-3, 3))
def test_group_law_and_unitarity(seed, s, t):
    grid = make_grid(256, 40.0, -20.0)
    f = random_bandlimited(grid, np.random.default_rng(seed))
    a = airy_propagate(airy_propagate(f, s), t)
    b = airy_propagate(f, s + t)
    assert np.max(np.abs(a.values - b.values)) < 1e-11
    assert airy_propagate(f, t).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)


def test_quartic_heat_damps_modes(grid):
    f = RealField.from_function(grid, lambda x: np.cos(2 * x))
    out = quartic_heat_propagate(f, 0.1, 0.5)
    assert np.allclose(out.values, np.exp(-0.1 * 0.5 * 16) * f.values, atol=1e-13)
    with pytest.raises(ValueError):
        quartic_heat_propagate(f, 0.1, -1.0)
    with pytest.raises(ValueError):
        quartic_heat_propagate(f, 0.0, 1.0)


def test_heat_rejects_backward_time(grid):
    f = RealField.from_function(grid, np.sin)
    assert np.allclose(heat_propagate(f, 1.0).values, np.exp(-1.0) * f.values, atol=1e-13)
    with pytest.raises(ValueError):
        heat_propagate(f, -0.1)


def test_schedule_amplitudes():
    sched = BlowupSchedule(3, 1e-3)
    assert np.allclose(sched.amplitudes, 1e-3 * np.exp(-np.array([1.0, 4.0, 9.0])))
    assert sched.alpha(2) == pytest.approx(1e-3 * np.exp(-4))
    with pytest.raises(ValueError):
        BlowupSchedule(-1, 1.0)
    with pytest.raises(ValueError):
        BlowupSchedule(2, 0.0)


def test_corner_profile_has_derivative_jump():
    grid = make_grid(2048, 40.0, -20.0)
    jumps = locate_jumps(corner_profile(grid, 1.0), 1.0)
    assert len(jumps) == 1
    assert jumps[0].position == pytest.approx(1.0, abs=grid.dx)
    assert jumps[0].size == pytest.approx(-4.0, rel=1e-2)


def test_blowup_data_needs_a_large_box():
    with pytest.raises(BoundaryContactError):
        build_blowup_data(BlowupSchedule(1, 1e-3), make_grid(512, 20.0, -10.0))


def test_blowup_data_reconverges_at_integer_time():
    # V(1) u0 contains alpha_1 exp(-2|x|) exactly, the other terms are smooth near 0
    grid = make_grid(4096, 200.0, -100.0)
    sched = BlowupSchedule(1, 1e-3)
    u0 = build_blowup_data(sched, grid)
    u1 = airy_propagate(u0, 1.0)
    assert np.allclose(u1.values, sched.alpha(1) * corner_profile(grid).values, atol=1e-12)
    assert smallness_report(sched, u0)["small"]


def test_weighted_identity_on_gaussian():
    grid = make_grid(2048, 80.0, -40.0)
    f = RealField.from_function(grid, lambda x: np.exp(-4 * x**2))
    result = weighted_identity(f, 0.1)
    assert result.residual < 1e-6
    assert result.window[0] < 0 < result.window[1]
    with pytest.raises(ValueError):
        weighted_identity(f, 0.0)
