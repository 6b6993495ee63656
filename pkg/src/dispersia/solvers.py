"""Time integration for gKdV, quasilinear KdV, BBM, DP and Brinkman.

gKdV and the parabolically regularized quasilinear equation are advanced
with integrating-factor RK4 (the linear symbol is applied exactly).  BBM,
DP and Brinkman are written as ODEs in function space,

    BBM       u_t = -d_x J^{-2} (u + u^2/2)
    DP        u_t = -u u_x - 3/2 d_x J^{-2} (u^2)
    Brinkman  rho_t = d_x (rho J^{-2} d_x (rho^2))

and advanced with classical RK4.  ``J^{-2} = (1 - d_x^2)^{-1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fieldkit import Grid, RealField

EQUATIONS = ("gkdv", "quasilinear", "bbm", "dp", "brinkman")
SAFETY = 4.0
GROWTH_LIMIT = 10.0


class InstabilityError(RuntimeError):
    """A step blew up or violated the stability rule; ``time`` is where it happened."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t = {time:.6g})")
        self.time = time


class _Ops:
    """Cached spectral symbols for one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.n = grid.n
        k = np.asarray(grid.k)
        self.k = k
        self.ik = 1j * k
        self.ik[-1] = 0.0
        self.bessel = 1.0 / (1.0 + k**2)
        self.mask = np.arange(grid.n // 2 + 1) <= grid.n // 3

    def fft(self, u):
        return np.fft.rfft(u)

    def ifft(self, uh):
        return np.fft.irfft(uh, self.n)

    def deriv(self, uh, order=1):
        m = (1j * self.k) ** order
        if order % 2:
            m[-1] = 0.0
        return m * uh

    def product(self, a, b, dealias=True):
        """Physical-space product; inputs and output truncated by the 2/3 rule."""
        if not dealias:
            return a * b
        fa = self.ifft(self.fft(a) * self.mask)
        fb = fa if b is a else self.ifft(self.fft(b) * self.mask)
        return self.ifft(self.fft(fa * fb) * self.mask)

    def power(self, u, p, dealias=True):
        out = u
        for _ in range(p - 1):
            out = self.product(out, u, dealias)
        return out


@lru_cache(maxsize=32)
def _ops(grid: Grid) -> _Ops:
    return _Ops(grid)


# ---------------------------------------------------------------- right-hand sides


def _bbm_rhs(ops: _Ops, u, dealias=True):
    f = u + 0.5 * ops.product(u, u, dealias)
    return ops.ifft(-ops.ik * ops.bessel * ops.fft(f))


def _dp_rhs(ops: _Ops, u, dealias=True):
    # -u u_x written as -(u^2/2)_x so the mean is conserved exactly
    sq = ops.fft(ops.product(u, u, dealias))
    return ops.ifft(-ops.ik * (0.5 + 1.5 * ops.bessel) * sq)


def _brinkman_velocity(ops: _Ops, rho, dealias=True):
    """``a = J^{-2} d_x (rho^2)``."""
    return ops.ifft(ops.bessel * ops.ik * ops.fft(ops.product(rho, rho, dealias)))


def _brinkman_rhs(ops: _Ops, rho, dealias=True):
    a = _brinkman_velocity(ops, rho, dealias)
    return ops.ifft(ops.ik * ops.fft(ops.product(rho, a, dealias)))


def _gkdv_nonlinear_hat(ops: _Ops, uh, power, dealias=True):
    """Fourier transform of ``-u^p u_x = -(u^{p+1})_x / (p+1)``."""
    u = ops.ifft(uh)
    return -ops.ik * ops.fft(ops.power(u, power + 1, dealias)) / (power + 1)


def _quasilinear_nonlinear_hat(ops: _Ops, uh, dealias=True):
    """Fourier transform of ``-(u_xx)^2 u_xxx = -((u_xx)^3 / 3)_x``."""
    uxx = ops.ifft(ops.deriv(uh, 2))
    return -ops.ik * ops.fft(ops.power(uxx, 3, dealias)) / 3.0


def rhs_bbm(u: RealField, dealias: bool = True) -> RealField:
    return RealField(u.grid, _bbm_rhs(_ops(u.grid), u.values, dealias))


def rhs_dp(u: RealField, dealias: bool = True) -> RealField:
    return RealField(u.grid, _dp_rhs(_ops(u.grid), u.values, dealias))


def rhs_brinkman(rho: RealField, dealias: bool = True) -> RealField:
    return RealField(rho.grid, _brinkman_rhs(_ops(rho.grid), rho.values, dealias))


def brinkman_velocity(rho: RealField, dealias: bool = True) -> RealField:
    """``a(x,t) = J^{-2} d_x (rho^2)``; the transport speed of ``rho`` is ``-a``."""
    return RealField(rho.grid, _brinkman_velocity(_ops(rho.grid), rho.values, dealias))


# ---------------------------------------------------------------- stability rules


def gkdv_dt_limit(u: RealField, power: int) -> float:
    amp = u.max_abs() ** power
    if amp == 0:
        return math.inf
    return 2.0 / (u.grid.k_max * amp * SAFETY)


def quasilinear_dt_limit(u: RealField) -> float:
    ops = _ops(u.grid)
    uxx = ops.ifft(ops.deriv(ops.fft(u.values), 2))
    amp = float(np.max(uxx**2))
    if amp == 0:
        return math.inf
    return 1.0 / (u.grid.k_max**3 * amp * SAFETY)


# ---------------------------------------------------------------- steppers


def _if_rk4(uh, lin, dt, nonlinear):
    e_half = np.exp(lin * dt / 2)
    e_full = e_half * e_half
    k1 = dt * nonlinear(uh)
    k2 = dt * nonlinear(e_half * (uh + k1 / 2))
    k3 = dt * nonlinear(e_half * uh + k2 / 2)
    k4 = dt * nonlinear(e_full * uh + e_half * k3)
    return e_full * uh + (e_full * k1 + 2 * e_half * (k2 + k3) + k4) / 6


def _rk4(u, dt, rhs):
    k1 = rhs(u)
    k2 = rhs(u + dt / 2 * k1)
    k3 = rhs(u + dt / 2 * k2)
    k4 = rhs(u + dt * k3)
    return u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _check_growth(old, new, t):
    old_max = float(np.max(np.abs(old)))
    if not np.all(np.isfinite(new)):
        raise InstabilityError("non-finite values", t)
    new_max = float(np.max(np.abs(new)))
    if new_max > GROWTH_LIMIT * old_max and new_max > 1e-300:
        raise InstabilityError(f"max|u| grew from {old_max:.3e} to {new_max:.3e} in one step", t)


def step_gkdv(u: RealField, k: int, dt: float, dealias: bool = True, t: float = 0.0) -> RealField:
    """One integrating-factor RK4 step of ``u_t + u_xxx + u^k u_x = 0``."""
    ops = _ops(u.grid)
    lin = 1j * ops.k**3
    lin[-1] = 0.0
    uh = _if_rk4(ops.fft(u.values), lin, dt, lambda vh: _gkdv_nonlinear_hat(ops, vh, k, dealias))
    new = ops.ifft(uh)
    _check_growth(u.values, new, t + dt)
    return RealField(u.grid, new)


def step_quasilinear(u: RealField, eps_visc: float, dt: float, dealias: bool = True, t: float = 0.0) -> RealField:
    """One integrating-factor RK4 step of ``u_t + (1 + u_xx^2) u_xxx = -eps u_xxxx``."""
    ops = _ops(u.grid)
    lin = 1j * ops.k**3 - eps_visc * ops.k**4
    lin[-1] = -eps_visc * ops.k[-1] ** 4
    uh = _if_rk4(ops.fft(u.values), lin, dt, lambda vh: _quasilinear_nonlinear_hat(ops, vh, dealias))
    new = ops.ifft(uh)
    _check_growth(u.values, new, t + dt)
    return RealField(u.grid, new)


def _step_rk4(u: RealField, rhs, dt, t):
    ops = _ops(u.grid)
    new = _rk4(u.values, dt, lambda v: rhs(ops, v))
    _check_growth(u.values, new, t + dt)
    return RealField(u.grid, new)


# ---------------------------------------------------------------- configuration / run


@dataclass(frozen=True)
class SolverConfig:
    equation: str
    dt: float
    t_end: float
    power: int = 1
    viscosity: float | None = None
    dealias: bool = True
    save_stride: int = 1

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ValueError(f"unknown equation {self.equation!r}; expected one of {EQUATIONS}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if int(self.save_stride) != self.save_stride or self.save_stride < 1:
            raise ValueError("save_stride must be a positive integer")
        if self.equation == "gkdv" and (int(self.power) != self.power or self.power < 1):
            raise ValueError("gkdv power k must be a positive integer")
        if self.equation == "quasilinear":
            if self.viscosity is None or not 0 < self.viscosity < 1:
                raise ValueError("quasilinear viscosity must lie in (0, 1)")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt * (1 - 1e-12))) if self.t_end > 0 else 0

    @property
    def step_size(self) -> float:
        """``dt`` shrunk (never grown) so that ``n_steps * step_size == t_end``."""
        return self.t_end / self.n_steps if self.n_steps else self.dt

    def stability_limit(self, u: RealField) -> float:
        if self.equation == "gkdv":
            return gkdv_dt_limit(u, self.power)
        if self.equation == "quasilinear":
            return quasilinear_dt_limit(u)
        return math.inf

    def check_stability(self, u: RealField, t: float = 0.0):
        limit = self.stability_limit(u)
        if self.step_size > limit:
            raise InstabilityError(
                f"dt = {self.step_size:.3e} exceeds the {self.equation} stability limit {limit:.3e}", t
            )


CONSERVED = {
    "gkdv": ("mass", "l2_squared"),
    "quasilinear": ("mass",),
    "bbm": ("mass", "h1_energy"),
    "dp": ("mass",),
    "brinkman": ("mass",),
}


def conserved_quantities(u: RealField, equation: str) -> dict[str, float]:
    out = {}
    for name in CONSERVED[equation]:
        if name == "mass":
            out[name] = u.integral()
        elif name == "l2_squared":
            out[name] = float(np.sum(u.values**2) * u.grid.dx)
        elif name == "h1_energy":
            ops = _ops(u.grid)
            ux = ops.ifft(ops.deriv(ops.fft(u.values)))
            out[name] = float(np.sum(u.values**2 + ux**2) * u.grid.dx)
    return out


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[RealField]
    conserved: dict[str, np.ndarray] = field(default_factory=dict)
    equation: str = ""

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    def __len__(self):
        return len(self.times)

    def drift(self, name: str) -> float:
        """Largest deviation of a conserved quantity from its initial value."""
        values = self.conserved[name]
        return float(np.max(np.abs(values - values[0])))

    def state_at(self, t: float) -> RealField:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.states[i]


def step(u: RealField, config: SolverConfig, dt: float, t: float = 0.0) -> RealField:
    eq = config.equation
    if eq == "gkdv":
        return step_gkdv(u, config.power, dt, config.dealias, t)
    if eq == "quasilinear":
        return step_quasilinear(u, config.viscosity, dt, config.dealias, t)
    rhs = {"bbm": _bbm_rhs, "dp": _dp_rhs, "brinkman": _brinkman_rhs}[eq]
    dealias = config.dealias
    return _step_rk4(u, lambda ops, v: rhs(ops, v, dealias), dt, t)


def run(u0: RealField, config: SolverConfig, progress=None) -> Trajectory:
    """Integrate ``u0`` to ``config.t_end`` and record snapshots and invariants.

    Snapshots are kept every ``save_stride`` steps plus the final state.
    Raises :class:`InstabilityError` (carrying the failure time) when a step
    violates the stability rule or blows up.
    """
    n_steps = config.n_steps
    dt = config.step_size
    u = u0
    times = [0.0]
    states = [u0]
    conserved = {name: [value] for name, value in conserved_quantities(u0, config.equation).items()}
    for i in range(1, n_steps + 1):
        t_prev = (i - 1) * dt
        config.check_stability(u, t_prev)
        u = step(u, config, dt, t_prev)
        if i % config.save_stride == 0 or i == n_steps:
            times.append(i * dt)
            states.append(u)
            for name, value in conserved_quantities(u, config.equation).items():
                conserved[name].append(value)
        if progress is not None:
            progress(i, n_steps)
    return Trajectory(
        times=np.array(times),
        states=states,
        conserved={k: np.array(v) for k, v in conserved.items()},
        equation=config.equation,
    )


def mollifier_kernel(grid: Grid, eps: float) -> np.ndarray:
    """Periodic samples of ``G_eps``, with ``G ~ exp(-1/(1-x^2))`` on (-1, 1), unit discrete mass."""
    offsets = grid.dx * np.arange(grid.n)
    offsets = np.where(offsets > grid.length / 2, offsets - grid.length, offsets)
    s = offsets / eps
    kernel = np.zeros(grid.n)
    inside = np.abs(s) < 1
    kernel[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return kernel / (kernel.sum() * grid.dx)


def mollify(f: RealField, eps: float) -> RealField:
    """Convolve with the even unit-mass bump ``G_eps(x) = G(x/eps)/eps``."""
    if eps < 2 * f.grid.dx:
        raise ValueError(f"mollifier width {eps} is below the resolution limit 2*dx = {2 * f.grid.dx}")
    kernel = mollifier_kernel(f.grid, eps)
    conv = np.fft.irfft(np.fft.rfft(f.values) * np.fft.rfft(kernel), f.grid.n) * f.grid.dx
    return RealField(f.grid, conv)
