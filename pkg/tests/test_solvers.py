import math

import numpy as np
import pytest

from dispersia.fieldkit import RealField, make_grid
from dispersia.initial_data import bbm_solitary, kdv_soliton
from dispersia.solvers import (
    InstabilityError,
    SolverConfig,
    brinkman_velocity,
    conserved_quantities,
    gkdv_dt_limit,
    mollify,
    quasilinear_dt_limit,
    rhs_bbm,
    rhs_brinkman,
    rhs_dp,
    run,
    step_gkdv,
)


@pytest.fixture
def circle():
    return make_grid(64, 2 * np.pi, -np.pi)


# right-hand sides on a cosine, worked out by hand: J^{-2} cos(mx) = cos(mx) / (1 + m^2)


def test_bbm_rhs_on_cosine(circle):
    a = 0.3
    u = RealField.from_function(circle, lambda x: a * np.cos(x))
    expected = a / 2 * np.sin(circle.x) + a**2 / 10 * np.sin(2 * circle.x)
    assert np.allclose(rhs_bbm(u).values, expected, atol=1e-14)


def test_dp_rhs_on_cosine(circle):
    a = 0.7
    u = RealField.from_function(circle, lambda x: a * np.cos(x))
    assert np.allclose(rhs_dp(u).values, 0.8 * a**2 * np.sin(2 * circle.x), atol=1e-14)


def test_brinkman_rhs_on_cosine(circle):
    a = 0.5
    rho = RealField.from_function(circle, lambda x: a * np.cos(x))
    x = circle.x
    assert np.allclose(brinkman_velocity(rho).values, -(a**2) / 5 * np.sin(2 * x), atol=1e-14)
    expected = -(a**3) / 10 * (3 * np.cos(3 * x) + np.cos(x))
    assert np.allclose(rhs_brinkman(rho).values, expected, atol=1e-14)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig("nls", 0.1, 1.0)
    with pytest.raises(ValueError):
        SolverConfig("gkdv", 0.0, 1.0)
    with pytest.raises(ValueError):
        SolverConfig("gkdv", 0.1, 1.0, power=0)
    with pytest.raises(ValueError):
        SolverConfig("quasilinear", 0.1, 1.0)
    with pytest.raises(ValueError):
        SolverConfig("bbm", 0.1, 1.0, save_stride=0)


def test_step_is_shrunk_to_hit_t_end():
    cfg = SolverConfig("bbm", 0.3, 1.0)
    assert cfg.n_steps == 4
    assert cfg.step_size == pytest.approx(0.25)
    assert SolverConfig("bbm", 0.25, 1.0).n_steps == 4
    assert SolverConfig("bbm", 0.1, 0.0).n_steps == 0


def test_stability_limits(circle):
    zero = RealField.zeros(circle)
    assert gkdv_dt_limit(zero, 1) == math.inf
    assert quasilinear_dt_limit(zero) == math.inf
    u = RealField.from_function(circle, lambda x: 2 * np.cos(x))
    assert gkdv_dt_limit(u, 2) == pytest.approx(2 / (circle.k_max * 4 * 4))
    # u_xx = -2 cos x, so max u_xx^2 = 4
    assert quasilinear_dt_limit(u) == pytest.approx(1 / (circle.k_max**3 * 4 * 4))


def test_run_raises_instability_with_time(circle):
    u = RealField.from_function(circle, lambda x: 5 * np.cos(x))
    cfg = SolverConfig("gkdv", 1.0, 2.0)
    with pytest.raises(InstabilityError) as info:
        run(u, cfg)
    assert info.value.time == 0.0


def test_kdv_soliton_translates():
    grid = make_grid(512, 60.0, -30.0)
    u0 = RealField.from_function(grid, lambda x: kdv_soliton(x, 1.0))
    traj = run(u0, SolverConfig("gkdv", 2e-3, 0.5, save_stride=50))
    exact = kdv_soliton(grid.x, 1.0, 0.5)
    assert np.max(np.abs(traj.states[-1].values - exact)) < 1e-8
    assert traj.drift("mass") < 1e-10
    assert traj.drift("l2_squared") < 1e-9
    assert list(traj.times) == pytest.approx([0, 0.1, 0.2, 0.3, 0.4, 0.5])


def test_bbm_solitary_translates():
    grid = make_grid(1024, 100.0, -50.0)
    u0 = RealField.from_function(grid, lambda x: bbm_solitary(x, 1.5))
    traj = run(u0, SolverConfig("bbm", 0.02, 1.0, save_stride=10))
    exact = bbm_solitary(grid.x, 1.5, 1.5)
    assert np.max(np.abs(traj.states[-1].values - exact)) < 1e-6
    assert traj.drift("h1_energy") < 1e-9


@pytest.mark.parametrize("equation", ["bbm", "dp", "brinkman"])
def test_zero_stays_zero(circle, equation):
    traj = run(RealField.zeros(circle), SolverConfig(equation, 0.1, 0.5))
    assert all(s.max_abs() == 0 for s in traj.states)


@pytest.mark.parametrize("equation,kw", [("dp", {}), ("brinkman", {}), ("quasilinear", {"viscosity": 1e-2})])
def test_mean_is_conserved(equation, kw):
    grid = make_grid(256, 40.0, -20.0)
    u0 = RealField.from_function(grid, lambda x: 0.5 * np.exp(-(x**2)) + 0.2 * np.exp(-((x - 3) ** 2)))
    dt = 2e-5 if equation == "quasilinear" else 0.01
    traj = run(u0, SolverConfig(equation, dt, 0.05, **kw))
    assert traj.drift("mass") < 1e-12


def test_gkdv_power_two_conserves_l2():
    grid = make_grid(256, 40.0, -20.0)
    u0 = RealField.from_function(grid, lambda x: np.exp(-(x**2)))
    traj = run(u0, SolverConfig("gkdv", 1e-3, 0.2, power=2, save_stride=20))
    assert traj.drift("l2_squared") < 1e-9


def test_growth_guard(circle):
    u = RealField.from_function(circle, lambda x: 50 * np.cos(x))
    with pytest.raises(InstabilityError):
        step_gkdv(u, 1, 1.0)


def test_conserved_quantities_of_cosine(circle):
    u = RealField.from_function(circle, lambda x: 1 + np.cos(x))
    q = conserved_quantities(u, "bbm")
    assert q["mass"] == pytest.approx(2 * np.pi)
    # ||1 + cos||^2 + ||sin||^2 = 3 pi + pi
    assert q["h1_energy"] == pytest.approx(4 * np.pi)


def test_mollifier_converges_on_a_corner():
    errors = []
    for n in (512, 1024, 2048):
        grid = make_grid(n, 40.0, -20.0)
        f = RealField.from_function(grid, lambda x: np.exp(-np.abs(x)))
        errors.append((mollify(f, 4 * grid.dx) - f).max_abs())
        assert mollify(f, 4 * grid.dx).integral() == pytest.approx(f.integral(), rel=1e-12)
    assert errors[0] > errors[1] > errors[2]
    with pytest.raises(ValueError):
        mollify(f, grid.dx)
