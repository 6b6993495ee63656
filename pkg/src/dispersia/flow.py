"""Characteristic curves of solver trajectories and the multi-peakon ODE.

Peakon system (sum over all k, ``sgn(0) = 0``)::

    dx_j/dt = sum_k a_k exp(-|x_j - x_k|)
    da_j/dt = 2 a_j sum_k a_k sgn(x_j - x_k) exp(-|x_j - x_k|)

A single peakon ``a exp(-|x - a t|)`` is an exact solution.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fieldkit import Grid, RealField
from .solvers import Trajectory, brinkman_velocity

logger = logging.getLogger(__name__)

COLLISION_DISTANCE = 1e-6
VELOCITIES = ("u", "brinkman")


class CollisionError(ValueError):
    """Raised when two peakons sit closer than the collision distance."""


# ---------------------------------------------------------------- characteristics


@dataclass(frozen=True)
class CharacteristicSet:
    """Paths ``X(t_i)`` of each seed, aligned with the trajectory times.

    Positions are wrapped into the periodic box.  ``wrapped[s]`` is true when
    seed ``s`` crossed the periodic boundary, in which case the path has no
    meaning on the line.
    """

    seeds: np.ndarray
    times: np.ndarray
    paths: np.ndarray
    wrapped: np.ndarray

    def path(self, i: int) -> np.ndarray:
        return self.paths[i]


def _velocity_samples(traj: Trajectory, velocity: str) -> np.ndarray:
    if velocity == "u":
        return np.array([s.values for s in traj.states])
    if velocity == "brinkman":
        # rho_t = a rho_x + rho a_x, so rho is carried by dX/dt = -a
        return np.array([-brinkman_velocity(s).values for s in traj.states])
    raise ValueError(f"unknown velocity selector {velocity!r}; expected one of {VELOCITIES}")


def _cubic_periodic(samples: np.ndarray, grid: Grid, x: np.ndarray) -> np.ndarray:
    """Four-point Lagrange interpolation of periodic samples at positions ``x``."""
    s = (np.asarray(x) - grid.left) / grid.dx
    i = np.floor(s).astype(int)
    f = s - i
    n = grid.n
    p0, p1, p2, p3 = (samples[(i + o) % n] for o in (-1, 0, 1, 2))
    return (
        -f * (f - 1) * (f - 2) / 6 * p0
        + (f + 1) * (f - 1) * (f - 2) / 2 * p1
        - (f + 1) * f * (f - 2) / 2 * p2
        + (f + 1) * f * (f - 1) / 6 * p3
    )


def advect_points(traj: Trajectory, seeds, velocity: str = "u", substeps: int = 1) -> CharacteristicSet:
    """Integrate ``dX/dt = V(X, t)`` from each seed with classical RK4.

    ``V`` is the solution itself (``velocity="u"``) or the Brinkman transport
    speed ``-J^{-2} d_x(rho^2)`` (``velocity="brinkman"``).  Between snapshots
    the velocity is interpolated cubically in space and linearly in time.
    """
    times = np.asarray(traj.times, dtype=float)
    if len(times) == 0:
        raise ValueError("empty trajectory")
    grid = traj.grid
    seeds = np.atleast_1d(np.asarray(seeds, dtype=float))
    if np.any((seeds < grid.left) | (seeds >= grid.right)):
        raise ValueError("seeds must lie inside the box")
    if len(times) > 1:
        steps = np.diff(times)
        if not np.allclose(steps[:-1], steps[0], rtol=1e-9, atol=0):
            raise ValueError("advection needs uniformly spaced snapshots")
    fields = _velocity_samples(traj, velocity)

    def vel(x, slot, frac):
        v0 = _cubic_periodic(fields[slot], grid, grid.wrap(x))
        if frac == 0.0:
            return v0
        return (1 - frac) * v0 + frac * _cubic_periodic(fields[slot + 1], grid, grid.wrap(x))

    paths = np.empty((len(seeds), len(times)))
    paths[:, 0] = seeds
    x = seeds.copy()
    for slot in range(len(times) - 1):
        h = (times[slot + 1] - times[slot]) / substeps
        for sub in range(substeps):
            a = sub / substeps
            b = (sub + 0.5) / substeps
            c = (sub + 1) / substeps
            k1 = vel(x, slot, a)
            k2 = vel(x + h / 2 * k1, slot, b)
            k3 = vel(x + h / 2 * k2, slot, b)
            k4 = vel(x + h * k3, slot, c)
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        paths[:, slot + 1] = x
    wrapped = np.any((paths < grid.left) | (paths >= grid.right), axis=1)
    if wrapped.any():
        logger.warning("%d characteristic(s) crossed the periodic boundary", int(wrapped.sum()))
    return CharacteristicSet(seeds=seeds, times=times, paths=grid.wrap(paths), wrapped=wrapped)


# ---------------------------------------------------------------- peakons


@dataclass(frozen=True)
class PeakonState:
    positions: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.array(self.positions, dtype=float))
        a = np.atleast_1d(np.array(self.amplitudes, dtype=float))
        if x.shape != a.shape or x.ndim != 1 or len(x) < 1:
            raise ValueError("positions and amplitudes must be matching non-empty 1-D arrays")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(a))):
            raise ValueError("peakon state must be finite")
        x.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "amplitudes", a)

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def min_separation(self) -> float:
        if self.count < 2:
            return np.inf
        d = np.abs(self.positions[:, None] - self.positions[None, :])
        return float(np.min(d[~np.eye(self.count, dtype=bool)]))

    @property
    def collided(self) -> bool:
        return self.min_separation < COLLISION_DISTANCE


def _peakon_rates(x: np.ndarray, a: np.ndarray):
    diff = x[:, None] - x[None, :]
    kernel = np.exp(-np.abs(diff))
    xdot = kernel @ a
    adot = 2.0 * a * ((np.sign(diff) * kernel) @ a)
    return xdot, adot


def peakon_derivatives(state: PeakonState) -> tuple[np.ndarray, np.ndarray]:
    """``(dx_j/dt, da_j/dt)`` of the peakon system."""
    if state.collided:
        raise CollisionError(f"peakons collided (separation {state.min_separation:.2e})")
    return _peakon_rates(np.asarray(state.positions), np.asarray(state.amplitudes))


class PeakonHistory(list):
    """List of ``(t, PeakonState)``; ``collision_time`` is set when a collision halted the run."""

    collision_time: float | None = None


def integrate_peakons(state0: PeakonState, dt: float, t_end: float) -> PeakonHistory:
    """Classical RK4 for the peakon system, stopping early at a collision."""
    if not dt > 0 or not t_end >= 0:
        raise ValueError("need dt > 0 and t_end >= 0")
    peakon_derivatives(state0)
    steps = int(np.ceil(t_end / dt * (1 - 1e-12))) if t_end > 0 else 0
    h = t_end / steps if steps else dt
    history = PeakonHistory([(0.0, state0)])
    y = np.concatenate([state0.positions, state0.amplitudes])
    m = state0.count

    def rates(y):
        xdot, adot = _peakon_rates(y[:m], y[m:])
        return np.concatenate([xdot, adot])

    for i in range(1, steps + 1):
        k1 = rates(y)
        k2 = rates(y + h / 2 * k1)
        k3 = rates(y + h / 2 * k2)
        k4 = rates(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        state = PeakonState(y[:m], y[m:])
        history.append((i * h, state))
        if state.collided:
            history.collision_time = i * h
            logger.warning("peakon collision at t = %.6g; integration halted", i * h)
            break
    return history


def peakon_field(state: PeakonState, grid: Grid) -> RealField:
    """``sum_j a_j exp(-|x - x_j|)`` sampled on the grid (no periodic images)."""
    x = np.asarray(grid.x)
    values = np.exp(-np.abs(x[:, None] - state.positions[None, :])) @ state.amplitudes
    return RealField(grid, values)
