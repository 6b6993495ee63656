"""Periodic grids, sampled fields and Fourier-multiplier operators.

Everything downstream works with :class:`RealField` samples on a uniform
periodic :class:`Grid`.  Spectral operators use the real-transform half
layout (modes ``0..n/2``) with wavenumbers ``k_m = 2*pi*m/L``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_DERIVATIVE_ORDER = 8


class GridMismatchError(ValueError):
    """Raised when fields defined on different grids are combined."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid ``x_i = left + i*dx`` for ``i = 0..n-1``."""

    n: int
    length: float
    left: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n % 2 or self.n < 8:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "left", float(self.left))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def right(self) -> float:
        """Right end of the period (identified with ``left``)."""
        return self.left + self.length

    @cached_property
    def x(self) -> np.ndarray:
        x = self.left + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Non-negative wavenumbers of the half layout."""
        k = 2.0 * np.pi * np.arange(self.n // 2 + 1) / self.length
        k.flags.writeable = False
        return k

    @property
    def k_max(self) -> float:
        return np.pi / self.dx

    def index_of(self, x: float) -> int:
        """Index of the grid point nearest to ``x`` (periodic)."""
        return int(np.rint((x - self.left) / self.dx)) % self.n

    def wrap(self, x):
        """Map positions into ``[left, left + length)``."""
        return self.left + np.mod(np.asarray(x, dtype=float) - self.left, self.length)


def make_grid(n: int, length: float, left: float = 0.0) -> Grid:
    return Grid(n, length, left)


@dataclass(frozen=True, eq=False)
class RealField:
    """Samples of a real function on a periodic grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "RealField":
        return cls(grid, func(np.asarray(grid.x)))

    @classmethod
    def zeros(cls, grid: Grid) -> "RealField":
        return cls(grid, np.zeros(grid.n))

    def _other(self, other):
        if isinstance(other, RealField):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return RealField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RealField(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return RealField(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return RealField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return RealField(self.grid, -self.values)

    def __len__(self):
        return self.grid.n

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> float:
        """Periodic trapezoid rule, i.e. ``sum(values) * dx``."""
        return float(np.sum(self.values) * self.grid.dx)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2) * self.grid.dx))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Half-layout Fourier coefficients of a real field (``numpy.fft.rfft``)."""

    grid: Grid
    coefficients: np.ndarray


def check_same_grid(*fields: RealField) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError("fields live on different grids")
    return grid


def transform(f: RealField) -> Spectrum:
    return Spectrum(f.grid, np.fft.rfft(f.values))


def inverse(spec: Spectrum) -> RealField:
    return RealField(spec.grid, np.fft.irfft(spec.coefficients, spec.grid.n))


def apply_multiplier(f: RealField, multiplier) -> RealField:
    """Multiply the half-layout spectrum of ``f`` by ``multiplier``."""
    fh = np.fft.rfft(f.values) * multiplier
    return RealField(f.grid, np.fft.irfft(fh, f.grid.n))


def derivative_multiplier(grid: Grid, order: int) -> np.ndarray:
    """``(ik)^order`` with the Nyquist entry removed for odd orders."""
    m = (1j * grid.k) ** order
    if order % 2:
        m[-1] = 0.0
    return m


def spectral_derivative(f: RealField, order: int = 1) -> RealField:
    if int(order) != order or not 0 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order must be an integer in [0, {MAX_DERIVATIVE_ORDER}]")
    if order == 0:
        return f
    return apply_multiplier(f, derivative_multiplier(f.grid, int(order)))


def bessel_inverse(f: RealField) -> RealField:
    """``(1 - d^2/dx^2)^{-1} f`` through the multiplier ``1/(1+k^2)``."""
    return apply_multiplier(f, 1.0 / (1.0 + f.grid.k**2))


def kernel_convolve_exp(f: RealField, chunk: int = 512) -> RealField:
    """Real-space quadrature of ``1/2 * int exp(-|x-y|) f(y) dy`` over one period.

    Periodic images are ignored on purpose.  The kernel has a kink at
    ``y = x`` which sits on a node; the trapezoid sum is corrected by the
    Euler-Maclaurin term for that kink (``-dx^2/12 * f(x)``) so the
    quadrature is fourth order for smooth ``f``.
    """
    grid = f.grid
    x = np.asarray(grid.x)
    v = f.values
    out = np.empty(grid.n)
    for start in range(0, grid.n, chunk):
        rows = slice(start, min(start + chunk, grid.n))
        kernel = 0.5 * np.exp(-np.abs(x[rows, None] - x[None, :]))
        out[rows] = kernel @ v * grid.dx
    out -= grid.dx**2 / 12.0 * v
    return RealField(grid, out)


def parseval_weights(grid: Grid) -> np.ndarray:
    """Weights turning ``|rfft|^2`` into the continuum ``L^2`` norm squared."""
    w = np.full(grid.n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w * grid.dx / grid.n


def sobolev_norm(f: RealField, s: float = 0.0) -> float:
    """``||f||_{H^s}`` with weights ``(1+k^2)^s``; ``s = 0`` gives the L2 norm."""
    if s < 0:
        raise ValueError("sobolev index must be non-negative")
    fh = np.fft.rfft(f.values)
    weights = parseval_weights(f.grid) * (1.0 + f.grid.k**2) ** s
    return float(np.sqrt(np.sum(weights * np.abs(fh) ** 2)))


def dealias_mask(grid: Grid) -> np.ndarray:
    """Two-thirds rule: keep modes with ``m <= n/3``."""
    m = np.arange(grid.n // 2 + 1)
    return m <= grid.n // 3


def dealiased_product(f: RealField, g: RealField) -> RealField:
    """Pointwise product with both factors and the result truncated by the 2/3 rule."""
    grid = check_same_grid(f, g)
    mask = dealias_mask(grid)
    fa = np.fft.irfft(np.fft.rfft(f.values) * mask, grid.n)
    ga = np.fft.irfft(np.fft.rfft(g.values) * mask, grid.n)
    ph = np.fft.rfft(fa * ga) * mask
    return RealField(grid, np.fft.irfft(ph, grid.n))


def random_bandlimited(grid: Grid, rng: np.random.Generator, modes: int | None = None) -> RealField:
    """Random real field with content only in the lowest ``modes`` modes (no Nyquist)."""
    if modes is None:
        modes = grid.n // 4
    fh = np.zeros(grid.n // 2 + 1, dtype=complex)
    fh[1 : modes + 1] = rng.standard_normal(modes) + 1j * rng.standard_normal(modes)
    fh[0] = rng.standard_normal()
    return RealField(grid, np.fft.irfft(fh, grid.n) * np.sqrt(grid.n))
