"""Linear propagators and the dispersive blow-up data.

The Airy group ``V(t) = exp(-t d^3/dx^3)`` acts on the mode ``exp(ikx)`` by
the phase ``exp(i k^3 t)``, so a plane wave ``cos(x)`` becomes ``cos(x + t)``.
The Nyquist mode is shared by ``+-k`` and is left untouched, which keeps the
discrete group exactly unitary.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fieldkit import Grid, RealField, apply_multiplier, sobolev_norm

logger = logging.getLogger(__name__)

#: smallness threshold for ``||u0||_{H^1}``; a scenario choice, not a derived value
DEFAULT_SMALLNESS = 0.05


class BoundaryContactError(ValueError):
    """Raised when propagated data is not negligible near the box edges."""


class WeightOverflowError(ValueError):
    """Raised when an exponential weight would overflow."""


def airy_multiplier(grid: Grid, t: float) -> np.ndarray:
    m = np.exp(1j * grid.k**3 * t)
    m[-1] = 1.0
    return m


def airy_propagate(f: RealField, t: float) -> RealField:
    """Solve ``v_t + v_xxx = 0`` exactly in Fourier space for time ``t`` (any sign)."""
    if t == 0:
        return f
    return apply_multiplier(f, airy_multiplier(f.grid, t))


def quartic_heat_propagate(f: RealField, eps: float, t: float) -> RealField:
    """Apply ``exp(-eps * t * d^4/dx^4)``, i.e. damp mode ``k`` by ``exp(-eps t k^4)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if t < 0:
        raise ValueError("the quartic heat semigroup is only defined for t >= 0")
    return apply_multiplier(f, np.exp(-eps * t * f.grid.k**4))


def heat_propagate(f: RealField, t: float, diffusivity: float = 1.0) -> RealField:
    """``exp(diffusivity * t * d^2/dx^2)``; backward times are rejected."""
    if diffusivity * t < 0:
        raise ValueError("backward heat flow is ill posed")
    return apply_multiplier(f, np.exp(-diffusivity * t * f.grid.k**2))


@dataclass(frozen=True)
class BlowupSchedule:
    """Amplitudes ``alpha_j = c * exp(-j^2)`` for ``j = 1..term_count``."""

    term_count: int
    amplitude_scale: float

    def __post_init__(self):
        if int(self.term_count) != self.term_count or self.term_count < 0:
            raise ValueError("term_count must be a non-negative integer")
        if not self.amplitude_scale > 0:
            raise ValueError("amplitude_scale must be positive")

    @property
    def amplitudes(self) -> np.ndarray:
        j = np.arange(1, self.term_count + 1, dtype=float)
        return self.amplitude_scale * np.exp(-(j**2))

    def alpha(self, j: int) -> float:
        return float(self.amplitude_scale * np.exp(-float(j) ** 2))


def corner_profile(grid: Grid, center: float = 0.0) -> RealField:
    """``exp(-2|x - center|)``, whose derivative jumps by -4 at ``center``."""
    return RealField.from_function(grid, lambda x: np.exp(-2.0 * np.abs(x - center)))


def build_blowup_data(schedule: BlowupSchedule, grid: Grid, boundary_tol: float = 0.1) -> RealField:
    """Sum ``alpha_j V(-j) exp(-2|x|)`` over the schedule.

    ``boundary_tol`` bounds ``max|u0|`` on the outer eighths of the box
    relative to ``max|u0|``.  The backward Airy tails of a corner decay only
    algebraically, so an absolute edge tolerance cannot be met on any
    practical box; the relative check still rejects schedules that have
    dispersed across the domain.
    """
    phi = corner_profile(grid)
    edge = np.exp(-2.0 * min(abs(grid.left), abs(grid.right)))
    if edge > 1e-14:
        raise BoundaryContactError(f"exp(-2|x|) is {edge:.1e} at the box edge; enlarge the box")
    total = np.zeros(grid.n)
    for j, alpha in enumerate(schedule.amplitudes, start=1):
        total += alpha * airy_propagate(phi, -float(j)).values
    u0 = RealField(grid, total)
    peak = u0.max_abs()
    if peak > 0:
        outer = np.abs(grid.x - (grid.left + 0.5 * grid.length)) > 0.375 * grid.length
        ratio = float(np.max(np.abs(total[outer]))) / peak
        if ratio > boundary_tol:
            raise BoundaryContactError(
                f"propagated data reaches the boundary (edge/peak = {ratio:.2e} > {boundary_tol:.1e})"
            )
    report = smallness_report(schedule, u0)
    logger.info("blow-up data: H1 = %.3e, H1.4 = %.3e", report["h1"], report["h1.4"])
    return u0


def smallness_report(schedule: BlowupSchedule, u0: RealField, threshold: float = DEFAULT_SMALLNESS) -> dict:
    phi_h1 = sobolev_norm(corner_profile(u0.grid), 1.0)
    h1 = sobolev_norm(u0, 1.0)
    return {
        "h1": h1,
        "h1.4": sobolev_norm(u0, 1.4),
        "alpha_sum_h1": float(np.sum(schedule.amplitudes)) * phi_h1,
        "threshold": threshold,
        "small": bool(h1 < threshold),
    }


@dataclass(frozen=True)
class WeightedIdentityResult:
    residual: float
    window: tuple[float, float]


def weighted_identity(f: RealField, t: float, trust: float = 1e-12) -> WeightedIdentityResult:
    """Compare ``V(t) f`` with ``exp(-x) V(t) exp(3t d^2) [exp(x-2t) f(x-3t)]``.

    The right-hand side is evaluated spectrally after an exact shift of
    ``f`` by ``3t``.  The comparison is restricted to the contiguous window
    around the peak of ``|V(t) f|`` on which both sides exceed ``trust``
    times the peak and where ``exp(-x)`` times the round-off level of the
    weighted evolution stays below ``1e-8`` of the peak.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    grid = f.grid
    x = np.asarray(grid.x)
    support = np.abs(f.values) > 0
    if not support.any():
        return WeightedIdentityResult(0.0, (grid.left, grid.left))
    if np.max(x[support]) + 3 * t >= 700.0 or np.max(-x) >= 700.0:
        raise WeightOverflowError("exp(x) weighting overflows on the data support")
    shifted = apply_multiplier(f, np.exp(-1j * grid.k * 3.0 * t) * _nyquist_one(grid)).values
    # interpolation round-off off the support would be amplified by exp(x)
    significant = np.abs(f.values) > 1e-16 * np.max(np.abs(f.values))
    steps = int(np.rint(3.0 * t / grid.dx))
    mask = np.roll(significant, steps)
    mask = np.convolve(mask.astype(float), np.ones(9), mode="same") > 0
    weighted = RealField(grid, np.where(mask, np.exp(x - 2.0 * t) * shifted, 0.0))
    w = airy_propagate(heat_propagate(weighted, 3.0 * t), t)
    rhs = np.exp(-x) * w.values
    lhs = airy_propagate(f, t).values
    peak = np.max(np.abs(lhs))
    # exp(-x) times the round-off level of w
    floor = np.exp(-x) * np.finfo(float).eps * np.max(np.abs(w.values)) * 100.0
    ok = (np.abs(lhs) > trust * peak) & (np.abs(rhs) > trust * peak) & (floor < 1e-8 * peak)
    i0 = int(np.argmax(np.abs(lhs)))
    lo = i0
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = i0
    while hi < grid.n - 1 and ok[hi + 1]:
        hi += 1
    sl = slice(lo, hi + 1)
    resid = np.linalg.norm(lhs[sl] - rhs[sl]) / np.linalg.norm(lhs[sl])
    return WeightedIdentityResult(float(resid), (float(x[lo]), float(x[hi])))


def weighted_identity_residual(f: RealField, t: float) -> float:
    return weighted_identity(f, t).residual


def _nyquist_one(grid: Grid) -> np.ndarray:
    m = np.ones(grid.n // 2 + 1)
    m[-1] = 0.0
    return m
