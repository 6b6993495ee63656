"""Initial data generators used by scenarios.

Each generator maps a grid and a parameter dictionary to a :class:`RealField`.
"""
from __future__ import annotations

import numpy as np

from .airy import BlowupSchedule, build_blowup_data
from .fieldkit import Grid, RealField
from .flow import PeakonState, peakon_field


class DataError(ValueError):
    """Raised for unknown or inconsistent initial-data descriptions."""


def kdv_soliton(x, c: float, x0: float = 0.0):
    """``3c sech^2(sqrt(c)(x - x0)/2)``, a travelling wave of ``u_t + u_xxx + u u_x = 0`` with speed ``c``."""
    return 3.0 * c / np.cosh(0.5 * np.sqrt(c) * (x - x0)) ** 2


def bbm_solitary(x, c: float, x0: float = 0.0):
    """``3(c-1) sech^2(sqrt((c-1)/c)(x - x0)/2)``, speed ``c > 1`` for ``u_t + u_x + u u_x - u_xxt = 0``."""
    if not c > 1:
        raise DataError("BBM solitary waves need c > 1")
    return 3.0 * (c - 1.0) / np.cosh(0.5 * np.sqrt((c - 1.0) / c) * (x - x0)) ** 2


def _closed_form(x, name: str, p: dict):
    if name == "zero":
        return np.zeros_like(x)
    if name == "constant":
        return np.full_like(x, float(p["value"]))
    if name == "gaussian":
        return p["amplitude"] * np.exp(-(((x - p.get("center", 0.0)) / p["width"]) ** 2))
    if name == "cosine":
        return p["amplitude"] * np.cos(p.get("wavenumber", 1.0) * x)
    if name == "sech":
        return p["amplitude"] / np.cosh((x - p.get("center", 0.0)) / p["width"])
    if name == "corner":
        return p["amplitude"] * np.exp(-p.get("rate", 1.0) * np.abs(x - p.get("center", 0.0)))
    if name == "kdv_soliton":
        return kdv_soliton(x, p["c"], p.get("center", 0.0))
    if name == "bbm_solitary":
        return bbm_solitary(x, p["c"], p.get("center", 0.0))
    raise DataError(f"unknown closed form {name!r}")


CLOSED_FORMS = ("zero", "constant", "gaussian", "cosine", "sech", "corner", "kdv_soliton", "bbm_solitary")


def smooth_window(x, start: float, stop: float, ramp: float):
    """Smooth bump equal to 1 on ``[start + ramp, stop - ramp]`` and 0 outside ``(start, stop)``."""

    def step(s):
        # C-infinity step from 0 (s <= 0) to 1 (s >= 1)
        s = np.clip(s, 0.0, 1.0)
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
        return a / (a + b)

    return step((x - start) / ramp) * step((stop - x) / ramp)


def rough_left(grid: Grid, s: float, amplitude: float, window: dict, band: dict, seed: int) -> RealField:
    """Random field with spectrum ``|k|^{-s-1/2}`` on a fixed band, windowed into ``x < 0``.

    The active modes are the box modes with ``band["k_min"] <= k <= band["k_max"]``.
    The band is fixed in ``k``, so the same data appears on every grid whose
    two-thirds cut lies above ``k_max``.  Phases come from
    ``numpy.random.default_rng(seed)``.  The series is scaled to
    ``max|u| = amplitude`` before windowing.
    """
    k_min, k_max = band["k_min"], band["k_max"]
    if not 0 < k_min <= k_max:
        raise DataError("rough band needs 0 < k_min <= k_max")
    if k_max > (2.0 / 3.0) * grid.k_max:
        raise DataError(f"k_max = {k_max} lies above the two-thirds cut {2 * grid.k_max / 3:.4g}")
    if window["stop"] > 0:
        raise DataError("the rough window must end at or left of x = 0")
    if window["start"] <= grid.left:
        raise DataError("the rough window must start inside the box")
    m = np.arange(int(np.ceil(k_min * grid.length / (2 * np.pi))), int(np.floor(k_max * grid.length / (2 * np.pi))) + 1)
    if len(m) == 0:
        raise DataError("the rough band contains no box modes")
    k = 2.0 * np.pi * m / grid.length
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, len(m))
    x = np.asarray(grid.x)
    series = (k ** (-s - 0.5) * np.cos(np.outer(x, k) + phases)).sum(axis=1)
    series *= amplitude / np.max(np.abs(series))
    return RealField(grid, series * smooth_window(x, window["start"], window["stop"], window["ramp"]))


def build_initial_data(grid: Grid, spec: dict, seed: int = 0) -> RealField:
    kind = spec["kind"]
    if kind == "closed_form":
        x = np.asarray(grid.x)
        return RealField(grid, _closed_form(x, spec["name"], spec.get("params", {})))
    if kind == "blowup_schedule":
        return build_blowup_data(BlowupSchedule(spec["J"], spec["c"]), grid)
    if kind == "peakons":
        state = PeakonState(spec["positions"], spec["amplitudes"])
        return peakon_field(state, grid)
    if kind == "rough_left":
        return rough_left(grid, spec["s"], spec["amplitude"], spec["window"], spec["band"], seed)
    if kind == "composite":
        total = RealField.zeros(grid)
        for part in spec["parts"]:
            total = total + build_initial_data(grid, part, seed)
        return total
    raise DataError(f"unknown initial data kind {kind!r}")
