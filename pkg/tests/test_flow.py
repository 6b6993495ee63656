import numpy as np
import pytest

from dispersia.fieldkit import RealField, make_grid
from dispersia.flow import (
    CollisionError,
    PeakonState,
    advect_points,
    integrate_peakons,
    peakon_derivatives,
    peakon_field,
)
from dispersia.solvers import Trajectory, brinkman_velocity


def _steady(grid, values, t_end=1.0, count=11):
    field = RealField(grid, values)
    times = np.linspace(0.0, t_end, count)
    return Trajectory(times, [field] * count)


def test_constant_velocity():
    grid = make_grid(128, 20.0, -10.0)
    traj = _steady(grid, np.full(grid.n, 0.3))
    chars = advect_points(traj, [-1.0, 2.0])
    assert np.allclose(chars.path(0), -1.0 + 0.3 * traj.times, atol=1e-13)
    assert not chars.wrapped.any()


def test_sine_velocity_matches_closed_form():
    # dX/dt = a sin X  =>  tan(X/2) = tan(X0/2) exp(a t)
    grid = make_grid(256, 2 * np.pi, -np.pi)
    a = 0.5
    traj = _steady(grid, a * np.sin(grid.x), t_end=2.0, count=41)
    seeds = np.array([0.3, 1.0, -2.0])
    chars = advect_points(traj, seeds, substeps=2)
    exact = 2 * np.arctan(np.tan(seeds / 2) * np.exp(a * 2.0))
    assert np.allclose(chars.paths[:, -1], exact, atol=1e-6)


def test_brinkman_velocity_sign():
    grid = make_grid(256, 2 * np.pi, -np.pi)
    rho = RealField.from_function(grid, lambda x: 1 + 0.2 * np.cos(x))
    traj = Trajectory(np.array([0.0, 0.01]), [rho, rho])
    chars = advect_points(traj, [0.5], velocity="brinkman")
    speed = (chars.paths[0, -1] - 0.5) / 0.01
    a = np.interp(0.5, grid.x, brinkman_velocity(rho).values)
    assert speed == pytest.approx(-a, rel=1e-2)


def test_advection_rejects_bad_input():
    grid = make_grid(64, 10.0, -5.0)
    field = RealField.zeros(grid)
    with pytest.raises(ValueError):
        advect_points(Trajectory(np.array([0.0, 0.1, 0.5, 0.6]), [field] * 4), [0.0])
    with pytest.raises(ValueError):
        advect_points(Trajectory(np.array([0.0, 1.0]), [field] * 2), [6.0])
    with pytest.raises(ValueError):
        advect_points(Trajectory(np.array([0.0, 1.0]), [field] * 2), [0.0], velocity="v")


def test_wrapping_is_flagged():
    grid = make_grid(64, 10.0, -5.0)
    traj = _steady(grid, np.full(grid.n, 2.0))
    chars = advect_points(traj, [4.0])
    assert chars.wrapped[0]
    assert grid.left <= chars.paths[0, -1] < grid.right


def test_single_peakon_travels_at_its_height():
    hist = integrate_peakons(PeakonState([0.0], [0.7]), 0.01, 2.0)
    t, state = hist[-1]
    assert t == pytest.approx(2.0)
    assert state.positions[0] == pytest.approx(1.4)
    assert state.amplitudes[0] == pytest.approx(0.7)


def test_two_peakons_conserve_total_amplitude():
    hist = integrate_peakons(PeakonState([-5.0, 5.0], [1.0, 0.5]), 0.001, 3.0)
    totals = [s.amplitudes.sum() for _, s in hist]
    assert np.ptp(totals) < 1e-12
    assert hist.collision_time is None


def test_peakon_rates_at_wide_separation():
    xdot, adot = peakon_derivatives(PeakonState([0.0, 50.0], [1.0, 2.0]))
    assert np.allclose(xdot, [1.0, 2.0], atol=1e-20)
    assert np.allclose(adot, 0.0, atol=1e-20)


def test_peakon_collision_is_refused():
    with pytest.raises(CollisionError):
        peakon_derivatives(PeakonState([0.0, 0.0], [1.0, 1.0]))
    with pytest.raises(ValueError):
        PeakonState([0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        integrate_peakons(PeakonState([0.0], [1.0]), 0.0, 1.0)


def test_peakon_field():
    grid = make_grid(400, 40.0, -20.0)
    u = peakon_field(PeakonState([-3.0, 2.0], [1.0, -0.5]), grid)
    i = grid.index_of(-3.0)
    assert u.values[i] == pytest.approx(1.0 - 0.5 * np.exp(-5.0))
