"""Measurement instruments for regularity experiments.

Cutoff families, solution-dependent weights, half-line energies, local
smoothing functionals, Hölder and jump detectors, and decay-weighted norms.
Every function here is a read-only function of fields or trajectories.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.polynomial import Polynomial

from .fieldkit import RealField, apply_multiplier, dealias_mask, derivative_multiplier, spectral_derivative

logger = logging.getLogger(__name__)

SAMPLE_POINTS = 10_000
PLATEAU_MARGIN = 0.02
CUTOFF_ZERO_TOL = 1e-14


class CutoffError(ValueError):
    """Raised when a cutoff family fails one of its defining properties."""


# ---------------------------------------------------------------- cutoff family


def _bump_tables(power: int = 8):
    """Unit-mass bump ``(1-s^2)^power`` on [-1, 1] with its step and ramp."""
    g = Polynomial([1.0, 0.0, -1.0]) ** power
    g = g / (g.integ()(1.0) - g.integ()(-1.0))
    step = g.integ(lbnd=-1.0)
    ramp = step.integ(lbnd=-1.0)
    return (ramp, step, g, g.deriv(), g.deriv(2), g.deriv(3))


_BUMP = _bump_tables()


def _smooth_ramp(y: np.ndarray, width: float, order: int) -> np.ndarray:
    """``order``-th derivative of ``R(y) = int_{-inf}^y H_width``, with ``H`` a smooth unit step.

    ``R`` vanishes for ``y <= -width`` and equals ``y`` for ``y >= width``.
    """
    s = np.clip(y / width, -1.0, 1.0)
    out = _BUMP[order](s) * width ** (1 - order)
    below, above = y <= -width, y >= width
    out = np.where(below, 0.0, out)
    if order == 0:
        out = np.where(above, y, np.maximum(out, 0.0))
    elif order == 1:
        out = np.where(above, 1.0, np.clip(out, 0.0, 1.0))
    else:
        out = np.where(above, 0.0, out)
    return out


@dataclass(frozen=True)
class CutoffFamily:
    """Smooth monotone switch ``chi`` from 0 (``x <= eps``) to 1 (``x >= b``).

    ``chi'`` is a mollified box: height ``height`` on ``[start, stop]``
    convolved with a bump of half-width ``shoulder``, so ``chi'`` has a flat
    plateau on ``[3 eps, b - 2 eps]`` and unit mass.
    """

    eps: float
    b: float
    height: float
    start: float
    stop: float
    shoulder: float
    domination: tuple[float, float, float]

    def derivative(self, x, order: int = 0) -> np.ndarray:
        """``chi^{(order)}(x)`` for ``order`` in 0..4 (order 0 is ``chi`` itself)."""
        if order not in range(5):
            raise ValueError("cutoff derivatives are available up to order 4")
        x = np.asarray(x, dtype=float)
        out = self.height * (
            _smooth_ramp(x - self.start, self.shoulder, order) - _smooth_ramp(x - self.stop, self.shoulder, order)
        )
        if order == 0:
            out = np.where(x >= self.stop + self.shoulder, 1.0, np.clip(out, 0.0, 1.0))
        elif order == 1:
            out = np.maximum(out, 0.0)
        return out

    def __call__(self, x) -> np.ndarray:
        return self.derivative(x, 0)

    def prime(self, x) -> np.ndarray:
        return self.derivative(x, 1)


def _cutoff_shape(eps: float, b: float):
    span = b - 3.0 * eps
    margin = PLATEAU_MARGIN
    shoulder = 0.5 * (span / (1.0 + margin) - (b - 5.0 * eps))
    if shoulder < 0.5 * eps:
        # a 2% margin leaves no room for the shoulders when b >> eps
        margin = eps / (b - 4.0 * eps)
        shoulder = 0.5 * eps
    height = (1.0 + margin) / span
    return height, 3.0 * eps - shoulder, b - 2.0 * eps + shoulder, shoulder


def make_cutoff(eps: float, b: float) -> CutoffFamily:
    """Build ``chi_{eps,b}`` and verify its support, monotonicity, plateau and domination properties."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not b >= 5.0 * eps:
        raise ValueError(f"b = {b} must be at least 5*eps = {5 * eps}")
    height, start, stop, shoulder = _cutoff_shape(eps, b)
    probe = CutoffFamily(eps, b, height, start, stop, shoulder, (math.nan,) * 3)
    domination = _check_cutoff(probe, _raw_cutoff(eps / 3.0, b + eps))
    return CutoffFamily(eps, b, height, start, stop, shoulder, domination)


def _raw_cutoff(eps: float, b: float) -> CutoffFamily:
    height, start, stop, shoulder = _cutoff_shape(eps, b)
    return CutoffFamily(eps, b, height, start, stop, shoulder, (math.nan,) * 3)


def _check_cutoff(chi: CutoffFamily, wide: CutoffFamily) -> tuple[float, float, float]:
    eps, b = chi.eps, chi.b
    x = np.linspace(-eps, b + 2.0 * eps, SAMPLE_POINTS)
    values = chi(x)
    if np.max(np.abs(values[x <= eps])) > CUTOFF_ZERO_TOL:
        raise CutoffError("chi does not vanish for x <= eps")
    if np.max(np.abs(values[x >= b] - 1.0)) > CUTOFF_ZERO_TOL:
        raise CutoffError("chi is not 1 for x >= b")
    slope = chi.prime(x)
    if np.any(slope < 0):
        raise CutoffError("chi' takes negative values")
    if np.any(slope[(x < eps) | (x > b)] != 0):
        raise CutoffError("chi' is not supported in [eps, b]")
    plateau = np.linspace(3.0 * eps, b - 2.0 * eps, SAMPLE_POINTS)
    if np.min(chi.prime(plateau)) < 1.0 / (b - 3.0 * eps):
        raise CutoffError("chi' falls below 1/(b - 3 eps) on [3 eps, b - 2 eps]")
    dominating = wide.prime(x)
    constants = []
    for j in (1, 2, 3):
        d = np.abs(chi.derivative(x, j))
        active = d > 0
        if np.any(dominating[active] <= 0):
            raise CutoffError(f"order-{j} derivative is not dominated by the wider cutoff")
        c = float(np.min(dominating[active] / d[active]))
        # c is the minimum ratio, so dominating >= c*d holds up to round-off
        if not (math.isfinite(c) and c > 0):
            raise CutoffError(f"no finite domination constant for order {j}")
        constants.append(c)
    return tuple(constants)


# ---------------------------------------------------------------- psi weights


@dataclass(frozen=True)
class PsiWeight:
    """The weight ``psi_{j,v,eps,b}(., t)`` built from a state ``u``."""

    j: int
    v: float
    t: float
    cutoff: CutoffFamily
    values: RealField
    comparability: float
    extrapolated: bool = False

    @property
    def d(self) -> float:
        return psi_exponent(self.j)

    @property
    def bound(self) -> float:
        return self.values.max_abs()


def psi_exponent(j: int) -> float:
    """``d_j = 1 - 2(j+1)/3``."""
    return 1.0 - 2.0 * (j + 1) / 3.0


def _coefficient(u: RealField):
    """``A = 1 + u_xx^2`` and its first two derivatives.

    The derivatives are spectral with the upper third of the modes removed;
    up to four derivatives would otherwise amplify round-off near Nyquist.
    """
    mask = dealias_mask(u.grid)
    z, zx, zxx = (apply_multiplier(u, derivative_multiplier(u.grid, order) * mask).values for order in (2, 3, 4))
    a = 1.0 + z * z
    ax = 2.0 * z * zx
    axx = 2.0 * (zx * zx + z * zxx)
    return a, ax, axx


def _cumulative_trapezoid(f: np.ndarray, fx: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative trapezoid from the first sample with the Euler-Maclaurin end correction."""
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1])) * dx
    return out - dx**2 / 12.0 * (fx - fx[0])


def make_psi(j: int, v: float, cutoff: CutoffFamily, u: RealField, t: float) -> PsiWeight:
    """Evaluate ``(2/3) A^{-d} int_{-inf}^x A^{d-1} chi'(s + v t) ds`` with ``A = 1 + u_xx^2``.

    The integral starts at the left edge of the grid, which must lie left of
    the support of ``chi'(. + v t)``.  It is integrated by parts first so the
    quadrature acts on ``chi`` rather than on the steeper ``chi'``.
    """
    if int(j) != j or j < 2:
        raise ValueError("psi weights need an integer order j >= 2")
    extrapolated = j < 8
    if extrapolated:
        logger.warning("psi weight of order j = %d < 8 is outside the intended range", j)
    if not v > 0:
        raise ValueError("speed v must be positive")
    grid = u.grid
    lo, hi = cutoff.start - cutoff.shoulder - v * t, cutoff.stop + cutoff.shoulder - v * t
    if lo <= grid.left or hi >= grid.right - grid.dx:
        raise ValueError(
            f"supp chi'(. + vt) = [{lo:.4g}, {hi:.4g}] is not inside the grid [{grid.left:.4g}, {grid.right:.4g})"
        )
    x = np.asarray(grid.x) + v * t
    d = psi_exponent(j)
    a, ax, axx = _coefficient(u)
    chi, chi1 = cutoff(x), cutoff.prime(x)
    # A^{d-1} chi' = (A^{d-1} chi)' - (d-1) A^{d-2} A_x chi
    g = (d - 1.0) * a ** (d - 2.0) * ax * chi
    gx = (d - 1.0) * ((d - 2.0) * a ** (d - 3.0) * ax * ax * chi + a ** (d - 2.0) * (axx * chi + ax * chi1))
    integral = a ** (d - 1.0) * chi - _cumulative_trapezoid(g, gx, grid.dx)
    psi = (2.0 / 3.0) * a ** (-d) * integral
    if np.min(psi) < -1e-12 * max(1.0, np.max(psi)):
        raise ArithmeticError("psi weight came out negative beyond round-off")
    psi = np.maximum(psi, 0.0)
    return PsiWeight(
        j=int(j),
        v=float(v),
        t=float(t),
        cutoff=cutoff,
        values=RealField(grid, psi),
        comparability=_comparability(psi, chi),
        extrapolated=extrapolated,
    )


def _comparability(psi: np.ndarray, chi: np.ndarray) -> float:
    """Smallest ``c`` with ``chi/c <= psi <= c chi`` on the grid."""
    if np.any((chi == 0) != (psi == 0)):
        return math.inf
    on = chi > 0
    if not on.any():
        return 1.0
    ratio = psi[on] / chi[on]
    return float(max(np.max(ratio), 1.0 / np.min(ratio), 1.0))


def _fd_first(f: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order central difference; the two end points on each side are left as NaN."""
    out = np.full_like(f, np.nan)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * dx)
    return out


def psi_ode_residual(psi: PsiWeight, u: RealField, t: float | None = None) -> float:
    """Max-norm residual of ``A psi_x + d_j A_x psi = (2/3) chi'(x + v t)``.

    ``psi_x`` is a fourth-order finite difference of the stored samples, so
    the residual measures the quadrature error of :func:`make_psi`.
    """
    if t is None:
        t = psi.t
    grid = u.grid
    a, ax, _ = _coefficient(u)
    p = psi.values.values
    lhs = a * _fd_first(p, grid.dx) + psi.d * ax * p
    rhs = (2.0 / 3.0) * psi.cutoff.prime(np.asarray(grid.x) + psi.v * t)
    return float(np.nanmax(np.abs(lhs - rhs)))


# ---------------------------------------------------------------- energies


def _segment_integral(values: np.ndarray, x: np.ndarray, a: float, right: float) -> float:
    """Trapezoid of piecewise-linear samples (periodically closed) over ``[a, right]``."""
    xs = np.append(x, right)
    vs = np.append(values, values[0])
    i = int(np.searchsorted(xs, a, side="right")) - 1
    i = min(max(i, 0), len(xs) - 2)
    h = xs[i + 1] - xs[i]
    theta = (a - xs[i]) / h
    va = vs[i] + theta * (vs[i + 1] - vs[i])
    head = 0.5 * (va + vs[i + 1]) * (xs[i + 1] - a)
    tail = float(np.sum(0.5 * (vs[i + 1 : -1] + vs[i + 2 :]) * np.diff(xs[i + 1 :])))
    return float(head + tail)


def halfline_energy(u: RealField, j: int, a: float) -> float:
    """``int_a^{right} (d_x^j u)^2 dx`` by the trapezoid rule."""
    grid = u.grid
    if not grid.left <= a <= grid.right:
        raise ValueError(f"a = {a} is outside the grid")
    dj = spectral_derivative(u, j).values
    return _segment_integral(dj**2, np.asarray(grid.x), a, grid.right)


def smoothing_integral(traj, l: int, v: float, cutoff: CutoffFamily) -> float:
    """``int_0^T int (d_x^{l+1} u)^2 chi'(x + v t) dx dt`` (trapezoid in t and x)."""
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    if len(traj.times) == 1:
        return 0.0
    x = np.asarray(traj.grid.x)
    dx = traj.grid.dx
    inner = np.array(
        [
            np.sum(spectral_derivative(s, l + 1).values ** 2 * cutoff.prime(x + v * t)) * dx
            for t, s in zip(traj.times, traj.states)
        ]
    )
    return float(np.trapezoid(inner, traj.times))


def weighted_decay_norm(u: RealField, j: int, delta: float) -> float:
    """``int (d_x^j u)^2 (1 + max(-x, 0)^2)^{-(j+delta)/2} dx``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    x = np.asarray(u.grid.x)
    weight = (1.0 + np.maximum(-x, 0.0) ** 2) ** (-(j + delta) / 2.0)
    return float(np.sum(spectral_derivative(u, j).values ** 2 * weight) * u.grid.dx)


def dp_momentum(u: RealField) -> RealField:
    """``m = u - u_xx``."""
    return apply_multiplier(u, 1.0 - derivative_multiplier(u.grid, 2))


# ---------------------------------------------------------------- Hölder seminorm

MAX_HOLDER_POINTS = 512


def holder_seminorm(u: RealField, interval: tuple[float, float], k: int = 0, theta: float = 0.0) -> float:
    """Sampled ``C^{k,theta}`` seminorm of ``u`` on ``interval``.

    Uses the k-th central difference quotient and at most 512 sample points,
    so the value is a lower bound for the continuum seminorm.
    """
    grid = u.grid
    lo, hi = interval
    if not hi - lo >= 10 * grid.dx:
        raise ValueError("interval must span at least 10 grid spacings")
    if not (0.0 <= theta < 1.0) or int(k) != k or k < 0:
        raise ValueError("need integer k >= 0 and theta in [0, 1)")
    x = np.asarray(grid.x)
    v = u.values
    diff = v.copy()
    for _ in range(int(k)):
        diff = (np.roll(diff, -1) - np.roll(diff, 1)) / (2.0 * grid.dx)
    inside = np.flatnonzero((x >= lo) & (x <= hi))
    if len(inside) < 2:
        raise ValueError("interval contains fewer than two grid points")
    stride = int(math.ceil(len(inside) / MAX_HOLDER_POINTS))
    idx = inside[::stride]
    d = diff[idx]
    if theta == 0:
        return float(np.max(np.abs(d)))
    xs = x[idx]
    num = np.abs(d[:, None] - d[None, :])
    den = np.abs(xs[:, None] - xs[None, :]) ** theta
    np.fill_diagonal(den, 1.0)
    return float(np.max(num / den))


# ---------------------------------------------------------------- jump detection

JUMP_OFFSET = 2
JUMP_WIDTH = 10
JUMP_DEGREE = 4


class Jump(NamedTuple):
    position: float
    size: float


@dataclass(frozen=True)
class JumpProfile:
    """Per-point one-sided derivative estimates.

    ``jump[i] = D+ - D-`` where ``D+`` fits a degree-``degree`` polynomial to
    ``width`` samples starting ``offset`` points right of ``x_i`` (and ``D-``
    mirrors it on the left); ``misfit[i]`` is the summed squared residual of
    the two fits, which is small only when neither window straddles a corner.
    """

    jump: np.ndarray
    misfit: np.ndarray


def _one_sided_operators(offset: int, width: int, degree: int):
    nodes = np.arange(offset, offset + width, dtype=float)
    vander = np.vander(nodes, degree + 1, increasing=True)
    pinv = np.linalg.pinv(vander)
    return pinv[1], np.eye(width) - vander @ pinv


def jump_profile(
    u: RealField, offset: int = JUMP_OFFSET, width: int = JUMP_WIDTH, degree: int = JUMP_DEGREE
) -> JumpProfile:
    if width <= degree + 1:
        raise ValueError("the fitting window must be longer than degree + 1")
    n = u.grid.n
    weights, projector = _one_sided_operators(offset, width, degree)
    reach = offset + width
    padded = np.concatenate([u.values[-reach:], u.values, u.values[:reach]])
    windows = sliding_window_view(padded, width)
    right = windows[reach + offset : reach + offset + n]
    left = windows[1 : 1 + n][:, ::-1]
    dplus = right @ weights / u.grid.dx
    dminus = -(left @ weights) / u.grid.dx
    misfit = np.sum((right @ projector.T) ** 2, axis=1) + np.sum((left @ projector.T) ** 2, axis=1)
    return JumpProfile(dplus - dminus, misfit)


def _circular_groups(indices: np.ndarray, n: int, gap: int) -> list[np.ndarray]:
    if len(indices) == 0:
        return []
    groups = np.split(indices, np.flatnonzero(np.diff(indices) > gap) + 1)
    if len(groups) > 1 and groups[0][0] + n - groups[-1][-1] <= gap:
        groups[0] = np.concatenate([groups[-1] - n, groups[0]])
        groups.pop()
    return groups


def locate_jumps(
    u: RealField,
    threshold: float,
    interval: tuple[float, float] | None = None,
    offset: int = JUMP_OFFSET,
    width: int = JUMP_WIDTH,
    degree: int = JUMP_DEGREE,
) -> list[Jump]:
    """Find first-derivative jumps larger than ``threshold``.

    Points where the one-sided derivative difference exceeds the threshold
    are grouped into clusters (optionally only inside ``interval``).  Within
    a cluster the corner lies where both one-sided fits are clean, so the
    position is the centre of the cluster weighted by ``1/misfit``.  Off the
    corner the difference picks up the second-derivative jump times the
    distance, so the size is a weighted linear fit of the differences
    evaluated at that position.
    """
    grid = u.grid
    profile = jump_profile(u, offset, width, degree)
    hits = np.abs(profile.jump) > threshold
    if interval is not None:
        x = np.asarray(grid.x)
        hits &= (x >= interval[0]) & (x <= interval[1])
    jumps = []
    for group in _circular_groups(np.flatnonzero(hits), grid.n, offset + width):
        idx = group % grid.n
        misfit = profile.misfit[idx]
        w = 1.0 / (misfit + np.min(misfit) + 1e-300)
        w /= np.max(w)
        centre = float(np.sum(w * group) / np.sum(w))
        g = profile.jump[idx]
        if np.sum(w > 1e-3) >= 2:
            slope, size = np.polyfit(group - centre, g, 1, w=np.sqrt(w))
        else:
            size = g[int(np.argmax(w))]
        if abs(size) <= threshold:
            continue
        position = grid.wrap(grid.left + grid.dx * centre)
        jumps.append(Jump(float(position), float(size)))
    return sorted(jumps)


def roughness_indicator(u: RealField, x0: float, radius: int = JUMP_OFFSET, **kwargs) -> float:
    """Largest one-sided derivative difference within ``radius`` points of ``x0``."""
    profile = jump_profile(u, **kwargs)
    i = u.grid.index_of(x0)
    idx = (i + np.arange(-radius, radius + 1)) % u.grid.n
    return float(np.max(np.abs(profile.jump[idx])))


# ---------------------------------------------------------------- report


@dataclass
class RegularityReport:
    """Named scalar diagnostics recorded at increasing times."""

    metadata: dict = field(default_factory=dict)
    times: list[float] = field(default_factory=list)
    records: dict[str, list[float]] = field(default_factory=dict)

    def add(self, t: float, **values: float) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError("report times must increase")
        for name, value in values.items():
            if not math.isfinite(value):
                raise ValueError(f"diagnostic {name} is not finite at t = {t}")
        known = set(self.records)
        if self.times and set(values) != known:
            raise ValueError("every record must carry the same diagnostics")
        self.times.append(float(t))
        for name, value in values.items():
            self.records.setdefault(name, []).append(float(value))

    def series(self, name: str) -> np.ndarray:
        return np.asarray(self.records[name])
