"""Declarative scenarios: schema, diagnostics registry, execution and artifacts.

A scenario is a JSON document naming an equation, a grid, a time schedule,
initial data and a list of diagnostics.  Every physical parameter is
explicit; there are no defaults for ``dt``, ``n`` or ``length``.

Artifacts of a run live in ``<root>/<name>/``:

``meta.json``
    scenario echo, versions, grid, timing, conserved drift and status.
``diag.csv``
    long format ``t,name,value`` with 17 significant digits.
``fields.csv``
    optional ``t,x,u`` dump of every saved state.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
import os
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from ._version import __version__
from .airy import BlowupSchedule, airy_propagate, smallness_report
from .diagnostics import (
    halfline_energy,
    holder_seminorm,
    locate_jumps,
    make_cutoff,
    make_psi,
    psi_ode_residual,
    roughness_indicator,
    weighted_decay_norm,
)
from .fieldkit import RealField, make_grid, sobolev_norm, spectral_derivative
from .flow import PeakonState, advect_points, integrate_peakons, peakon_field
from .initial_data import CLOSED_FORMS, bbm_solitary, build_initial_data, kdv_soliton
from .solvers import EQUATIONS, InstabilityError, SolverConfig, Trajectory, mollify, run

logger = logging.getLogger(__name__)

OUTPUT_ENV = "DISPERSIA_OUT"
DEFAULT_ROOT = "dispersia_runs"
LINEAR_EQUATION = "airy"
ALL_EQUATIONS = EQUATIONS + (LINEAR_EQUATION,)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3


class ConfigError(ValueError):
    """The scenario document is malformed or inconsistent."""


# ---------------------------------------------------------------- schema

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_INTERVAL = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

_DATA_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["closed_form", "blowup_schedule", "peakons", "rough_left", "composite"]},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "closed_form"}}},
            "then": {
                "required": ["name", "params"],
                "properties": {
                    "kind": True,
                    "name": {"enum": list(CLOSED_FORMS)},
                    "params": {"type": "object", "additionalProperties": _NUMBER},
                },
                "additionalProperties": False,
            },
        },
        {
            "if": {"properties": {"kind": {"const": "blowup_schedule"}}},
            "then": {
                "required": ["J", "c"],
                "properties": {"kind": True, "J": {"type": "integer", "minimum": 0}, "c": _POSITIVE},
                "additionalProperties": False,
            },
        },
        {
            "if": {"properties": {"kind": {"const": "peakons"}}},
            "then": {
                "required": ["positions", "amplitudes"],
                "properties": {
                    "kind": True,
                    "positions": {"type": "array", "items": _NUMBER, "minItems": 1},
                    "amplitudes": {"type": "array", "items": _NUMBER, "minItems": 1},
                },
                "additionalProperties": False,
            },
        },
        {
            "if": {"properties": {"kind": {"const": "rough_left"}}},
            "then": {
                "required": ["s", "amplitude", "window", "band"],
                "properties": {
                    "kind": True,
                    "s": _NUMBER,
                    "amplitude": _POSITIVE,
                    "window": {
                        "type": "object",
                        "required": ["start", "stop", "ramp"],
                        "properties": {"start": _NUMBER, "stop": _NUMBER, "ramp": _POSITIVE},
                        "additionalProperties": False,
                    },
                    "band": {
                        "type": "object",
                        "required": ["k_min", "k_max"],
                        "properties": {"k_min": _POSITIVE, "k_max": _POSITIVE},
                        "additionalProperties": False,
                    },
                },
                "additionalProperties": False,
            },
        },
        {
            "if": {"properties": {"kind": {"const": "composite"}}},
            "then": {
                "required": ["parts"],
                "properties": {"kind": True, "parts": {"type": "array", "items": {"$ref": "#/$defs/data"}, "minItems": 1}},
                "additionalProperties": False,
            },
        },
    ],
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["name", "equation", "grid", "time", "initial_data"],
    "additionalProperties": False,
    "$defs": {"data": _DATA_SCHEMA},
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "equation": {
            "type": "object",
            "required": ["name"],
            "properties": {
                "name": {"enum": list(ALL_EQUATIONS)},
                "power": {"type": "integer", "minimum": 1},
                "viscosity": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "additionalProperties": False,
            "allOf": [
                {"if": {"properties": {"name": {"const": "gkdv"}}}, "then": {"required": ["power"]}},
                {"if": {"properties": {"name": {"const": "quasilinear"}}}, "then": {"required": ["viscosity"]}},
            ],
        },
        "grid": {
            "type": "object",
            "required": ["n", "length", "left"],
            "properties": {"n": {"type": "integer", "minimum": 8}, "length": _POSITIVE, "left": _NUMBER},
            "additionalProperties": False,
        },
        "time": {
            "type": "object",
            "required": ["dt", "t_end", "save_stride"],
            "properties": {
                "dt": _POSITIVE,
                "t_end": {"type": "number", "minimum": 0},
                "save_stride": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "dealias": {"type": "boolean"},
        "mollify": {"type": "number", "minimum": 2, "description": "mollifier width in grid spacings"},
        "initial_data": {"$ref": "#/$defs/data"},
        "diagnostics": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name"],
                "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
                "additionalProperties": False,
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "save_fields": {"type": "boolean"},
    },
}


# ---------------------------------------------------------------- diagnostics registry


@dataclass
class RunContext:
    """What a diagnostic sees: the scenario and its trajectory."""

    scenario: "Scenario"
    traj: Trajectory

    @property
    def grid(self):
        return self.traj.grid

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.traj.times)


Series = dict[str, np.ndarray]


@dataclass(frozen=True)
class DiagnosticSpec:
    name: str
    params: dict
    compute: Callable[[RunContext, dict], Series]
    doc: str


REGISTRY: dict[str, DiagnosticSpec] = {}


def _register(name: str, params: dict, doc: str):
    schema = {"type": "object", "properties": params, "required": sorted(params), "additionalProperties": False}

    def wrap(fn):
        REGISTRY[name] = DiagnosticSpec(name, schema, fn, doc)
        return fn

    return wrap


def _per_state(ctx: RunContext, fn) -> np.ndarray:
    return np.array([fn(t, u) for t, u in zip(ctx.times, ctx.traj.states)], dtype=float)


@_register("conserved", {}, "the equation's tracked invariants")
def _diag_conserved(ctx, p):
    return {name: np.asarray(v, dtype=float) for name, v in ctx.traj.conserved.items()}


@_register("max_abs", {}, "max |u|")
def _diag_max_abs(ctx, p):
    return {"max_abs": _per_state(ctx, lambda t, u: u.max_abs())}


@_register("sobolev_norm", {"s": {"type": "number", "minimum": 0}}, "||u||_{H^s}")
def _diag_sobolev(ctx, p):
    return {f"h{p['s']:g}_norm": _per_state(ctx, lambda t, u: sobolev_norm(u, p["s"]))}


@_register(
    "halfline_energy",
    {
        "j": {"type": "integer", "minimum": 0, "maximum": 8},
        "x0": _NUMBER,
        "eps": _NUMBER,
        "v": _NUMBER,
    },
    "int_{x0+eps-vt}^right (d^j u)^2 and the global int (d^j u)^2",
)
def _diag_halfline(ctx, p):
    j = p["j"]
    a0 = p["x0"] + p["eps"]
    half = _per_state(ctx, lambda t, u: halfline_energy(u, j, a0 - p["v"] * t))
    whole = _per_state(ctx, lambda t, u: float(np.sum(spectral_derivative(u, j).values ** 2) * u.grid.dx))
    return {f"halfline_energy_j{j}": half, f"global_energy_j{j}": whole}


@_register(
    "smoothing_integral",
    {"l": {"type": "integer", "minimum": 0, "maximum": 7}, "v": _NUMBER, "eps": _POSITIVE, "b": _POSITIVE},
    "cumulative int_0^t int (d^{l+1} u)^2 chi'(x + v s) dx ds",
)
def _diag_smoothing(ctx, p):
    cutoff = make_cutoff(p["eps"], p["b"])
    x = np.asarray(ctx.grid.x)
    dx = ctx.grid.dx
    inner = _per_state(
        ctx, lambda t, u: np.sum(spectral_derivative(u, p["l"] + 1).values ** 2 * cutoff.prime(x + p["v"] * t)) * dx
    )
    t = ctx.times
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (inner[1:] + inner[:-1]) * np.diff(t))])
    return {f"smoothing_integral_l{p['l']}": cumulative}


@_register(
    "jumps",
    {"threshold": _POSITIVE, "interval": _INTERVAL},
    "count, position and size of the largest derivative jump in the interval",
)
def _diag_jumps(ctx, p):
    count, pos, size = [], [], []
    for u in ctx.traj.states:
        found = locate_jumps(u, p["threshold"], interval=tuple(p["interval"]))
        count.append(len(found))
        if found:
            best = max(found, key=lambda j: abs(j.size))
            pos.append(best.position)
            size.append(best.size)
        else:
            pos.append(math.nan)
            size.append(0.0)
    return {"jump_count": np.array(count, float), "jump_position": np.array(pos), "jump_size": np.array(size)}


@_register("roughness", {"x0": _NUMBER, "radius": {"type": "integer", "minimum": 0}}, "max |D+ - D-| near x0")
def _diag_roughness(ctx, p):
    return {"roughness": _per_state(ctx, lambda t, u: roughness_indicator(u, p["x0"], p["radius"]))}


@_register(
    "holder",
    {"interval": _INTERVAL, "k": {"type": "integer", "minimum": 0}, "theta": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}},
    "Hölder seminorm of d^k u on the interval",
)
def _diag_holder(ctx, p):
    return {
        f"holder_k{p['k']}": _per_state(ctx, lambda t, u: holder_seminorm(u, tuple(p["interval"]), p["k"], p["theta"]))
    }


@_register("weighted_decay", {"j": {"type": "integer", "minimum": 0, "maximum": 8}, "delta": _POSITIVE}, "decay-weighted norm")
def _diag_weighted_decay(ctx, p):
    return {f"weighted_decay_j{p['j']}": _per_state(ctx, lambda t, u: weighted_decay_norm(u, p["j"], p["delta"]))}


@_register(
    "psi_residual",
    {"j": {"type": "integer", "minimum": 2}, "v": _POSITIVE, "eps": _POSITIVE, "b": _POSITIVE},
    "residual of the psi-weight ODE",
)
def _diag_psi(ctx, p):
    cutoff = make_cutoff(p["eps"], p["b"])

    def one(t, u):
        psi = make_psi(p["j"], p["v"], cutoff, u, t)
        return psi_ode_residual(psi, u, t)

    return {"psi_residual": _per_state(ctx, one)}


@_register(
    "closed_form_error",
    {"speed": _NUMBER},
    "relative L2 distance to the translated initial closed form",
)
def _diag_closed_form(ctx, p):
    data = ctx.scenario.initial_data
    if data["kind"] != "closed_form":
        raise ConfigError("closed_form_error needs closed_form initial data")
    x = np.asarray(ctx.grid.x)
    params = dict(data["params"])
    center = params.get("center", 0.0)

    def one(t, u):
        shifted = dict(params, center=center + p["speed"] * t)
        exact = _closed_form_values(x, data["name"], shifted)
        return float(np.linalg.norm(u.values - exact) / np.linalg.norm(exact))

    return {"closed_form_error": _per_state(ctx, one)}


def _closed_form_values(x, name, params):
    if name == "kdv_soliton":
        return kdv_soliton(x, params["c"], params["center"])
    if name == "bbm_solitary":
        return bbm_solitary(x, params["c"], params["center"])
    raise ConfigError(f"closed_form_error has no travelling form for {name!r}")


@_register("peak", {}, "position of max u (three-point parabolic refinement)")
def _diag_peak(ctx, p):
    def one(t, u):
        g = u.grid
        i = int(np.argmax(u.values))
        um, u0, up = u.values[(i - 1) % g.n], u.values[i], u.values[(i + 1) % g.n]
        denom = um - 2 * u0 + up
        shift = 0.5 * (um - up) / denom if denom != 0 else 0.0
        return float(g.x[i] + shift * g.dx)

    return {"peak_position": _per_state(ctx, one)}


@_register(
    "characteristics",
    {"seeds": {"type": "array", "items": _NUMBER, "minItems": 1}, "velocity": {"enum": ["u", "brinkman"]}},
    "paths X(t) of dX/dt = velocity",
)
def _diag_characteristics(ctx, p):
    cs = advect_points(ctx.traj, p["seeds"], velocity=p["velocity"])
    return {f"characteristic_{i}": cs.paths[i] for i in range(len(p["seeds"]))}


@_register("peakon_ode", {"dt": _POSITIVE}, "peakon ODE positions and relative L2 gap to the PDE state")
def _diag_peakon_ode(ctx, p):
    data = ctx.scenario.initial_data
    if data["kind"] != "peakons":
        raise ConfigError("peakon_ode needs peakon initial data")
    state = PeakonState(data["positions"], data["amplitudes"])
    times = ctx.times
    gap, positions = [], []
    t_prev = 0.0
    for t, u in zip(times, ctx.traj.states):
        if t > t_prev:
            history = integrate_peakons(state, p["dt"], t - t_prev)
            if history.collision_time is not None:
                raise InstabilityError("peakon collision", t_prev + history.collision_time)
            state = history[-1][1]
            t_prev = t
        ode = peakon_field(state, u.grid).values
        gap.append(float(np.linalg.norm(u.values - ode) / np.linalg.norm(ode)))
        positions.append(np.asarray(state.positions))
    out = {"peakon_discrepancy": np.array(gap)}
    positions = np.array(positions)
    for i in range(positions.shape[1]):
        out[f"peakon_{i}_position"] = positions[:, i]
    return out


def _validate_diagnostics(requests: list[dict]) -> None:
    seen = set()
    for req in requests:
        name = req["name"]
        if name not in REGISTRY:
            raise ConfigError(f"unknown diagnostic {name!r}; known: {sorted(REGISTRY)}")
        try:
            jsonschema.validate(req.get("params", {}), REGISTRY[name].params)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"diagnostic {name}: {exc.message}") from None
        key = json.dumps(req, sort_keys=True)
        if key in seen:
            raise ConfigError(f"diagnostic {name} requested twice with the same parameters")
        seen.add(key)


# ---------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class Scenario:
    """A validated scenario document."""

    document: dict

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        try:
            jsonschema.validate(doc, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"{where}: {exc.message}") from None
        _validate_diagnostics(doc.get("diagnostics", []))
        scenario = cls(copy.deepcopy(doc))
        scenario.check()
        return scenario

    @classmethod
    def from_file(cls, path) -> "Scenario":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON ({exc})") from None
        return cls.from_dict(doc)

    # convenient views
    @property
    def name(self) -> str:
        return self.document["name"]

    @property
    def equation(self) -> str:
        return self.document["equation"]["name"]

    @property
    def initial_data(self) -> dict:
        return self.document["initial_data"]

    @property
    def diagnostics(self) -> list[dict]:
        return self.document.get("diagnostics", [])

    @property
    def seed(self) -> int:
        return self.document.get("seed", 0)

    def grid(self):
        g = self.document["grid"]
        return make_grid(g["n"], g["length"], g["left"])

    def solver_config(self) -> SolverConfig | None:
        if self.equation == LINEAR_EQUATION:
            return None
        eq = self.document["equation"]
        tm = self.document["time"]
        return SolverConfig(
            equation=self.equation,
            dt=tm["dt"],
            t_end=tm["t_end"],
            power=eq.get("power", 1),
            viscosity=eq.get("viscosity"),
            dealias=self.document.get("dealias", True),
            save_stride=tm["save_stride"],
        )

    def initial_state(self) -> RealField:
        grid = self.grid()
        u0 = build_initial_data(grid, self.initial_data, self.seed)
        width = self.document.get("mollify")
        if width is not None:
            u0 = mollify(u0, width * grid.dx)
        return u0

    def check(self) -> None:
        """Everything that can be validated without time stepping."""
        try:
            config = self.solver_config()
            u0 = self.initial_state()
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from None
        if not np.all(np.isfinite(u0.values)):
            raise ConfigError("initial data is not finite")
        if config is not None:
            try:
                config.check_stability(u0, 0.0)
            except InstabilityError as exc:
                raise ConfigError(str(exc)) from None
        for req in self.diagnostics:
            _check_requirements(self, req["name"], req.get("params", {}))

    def with_value(self, axis: str, value) -> "Scenario":
        """Copy with the dotted parameter ``axis`` replaced by ``value``."""
        doc = copy.deepcopy(self.document)
        node = doc
        keys = axis.split(".")
        for key in keys[:-1]:
            if isinstance(node, list):
                key = int(key)
            try:
                node = node[key]
            except (KeyError, IndexError, TypeError):
                raise ConfigError(f"unknown sweep axis {axis!r}") from None
        last = int(keys[-1]) if isinstance(node, list) else keys[-1]
        try:
            current = node[last]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(f"unknown sweep axis {axis!r}") from None
        if isinstance(current, bool) or not isinstance(current, (int, float)):
            raise ConfigError(f"sweep axis {axis!r} is not numeric")
        node[last] = value
        return Scenario.from_dict(doc)


def _check_requirements(scenario: Scenario, name: str, params: dict) -> None:
    data = scenario.initial_data
    if name == "closed_form_error" and not (
        data["kind"] == "closed_form" and data["name"] in ("kdv_soliton", "bbm_solitary")
    ):
        raise ConfigError("closed_form_error needs kdv_soliton or bbm_solitary initial data")
    if name == "peakon_ode" and data["kind"] != "peakons":
        raise ConfigError("peakon_ode needs peakon initial data")
    if name in ("smoothing_integral", "psi_residual"):
        try:
            make_cutoff(params["eps"], params["b"])
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from None
    if name == "characteristics" and scenario.equation == LINEAR_EQUATION:
        raise ConfigError("characteristics need a nonlinear trajectory")


def _airy_trajectory(u0: RealField, doc: dict) -> Trajectory:
    tm = doc["time"]
    steps = int(math.ceil(tm["t_end"] / tm["dt"] * (1 - 1e-12))) if tm["t_end"] > 0 else 0
    h = tm["t_end"] / steps if steps else tm["dt"]
    saved = sorted(set(range(0, steps + 1, tm["save_stride"])) | {steps})
    times = np.array([i * h for i in saved])
    states = [u0 if t == 0 else airy_propagate(u0, t) for t in times]
    conserved = {
        "mass": np.array([u.integral() for u in states]),
        "l2_squared": np.array([float(np.sum(u.values**2) * u.grid.dx) for u in states]),
    }
    return Trajectory(times=times, states=states, conserved=conserved, equation=LINEAR_EQUATION)


# ---------------------------------------------------------------- execution


@dataclass
class RunArtifacts:
    """Result of one scenario run (files plus the in-memory trajectory)."""

    scenario: Scenario
    status: str
    exit_code: int
    meta: dict
    diag: list[tuple[float, str, float]] = field(default_factory=list)
    traj: Trajectory | None = None
    directory: Path | None = None

    def series(self, name: str) -> np.ndarray:
        return np.array([v for _, n, v in self.diag if n == name])

    @property
    def times(self) -> np.ndarray:
        names = [n for _, n, _ in self.diag]
        first = names[0] if names else None
        return np.array([t for t, n, _ in self.diag if n == first])

    def terminal(self) -> dict[str, float]:
        out = {}
        for _, name, value in self.diag:
            out[name] = value
        return out

    @property
    def final_state(self) -> RealField | None:
        return self.traj.states[-1] if self.traj is not None else None


def execute(scenario: Scenario) -> RunArtifacts:
    """Run the scenario in memory; no files are written."""
    u0 = scenario.initial_state()
    start = time.perf_counter()
    meta = {
        "scenario": scenario.document,
        "versions": {"dispersia": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "grid": {"n": u0.grid.n, "length": u0.grid.length, "left": u0.grid.left, "dx": u0.grid.dx},
    }
    if scenario.initial_data["kind"] == "blowup_schedule":
        d = scenario.initial_data
        meta["smallness"] = smallness_report(BlowupSchedule(d["J"], d["c"]), u0)
    try:
        if scenario.equation == LINEAR_EQUATION:
            traj = _airy_trajectory(u0, scenario.document)
        else:
            traj = run(u0, scenario.solver_config())
        ctx = RunContext(scenario, traj)
        columns: dict[str, np.ndarray] = {}
        for req in scenario.diagnostics:
            spec = REGISTRY[req["name"]]
            for name, values in spec.compute(ctx, req.get("params", {})).items():
                values = np.asarray(values, dtype=float)
                if values.shape != (len(traj.times),):
                    raise RuntimeError(f"diagnostic {name} returned {values.shape} values for {len(traj.times)} times")
                if name in columns:
                    raise ConfigError(f"two diagnostics both produce {name!r}")
                columns[name] = values
    except InstabilityError as exc:
        meta.update(status="unstable", failure_time=exc.time, error=str(exc))
        meta["timing"] = {"wall_seconds": time.perf_counter() - start}
        return RunArtifacts(scenario, "unstable", EXIT_UNSTABLE, meta)
    diag = [(float(t), name, float(col[i])) for i, t in enumerate(traj.times) for name, col in columns.items()]
    meta["status"] = "ok"
    meta["conserved_drift"] = {name: traj.drift(name) for name in traj.conserved}
    meta["saved_times"] = len(traj.times)
    meta["timing"] = {"wall_seconds": time.perf_counter() - start}
    return RunArtifacts(scenario, "ok", EXIT_OK, meta, diag, traj)


def format_number(value: float) -> str:
    """17 significant digits, '.' decimal point."""
    return format(float(value), ".17g")


def diag_csv_text(diag) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "name", "value"])
    for t, name, value in diag:
        writer.writerow([format_number(t), name, format_number(value)])
    return buf.getvalue()


def fields_csv_text(traj: Trajectory) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "x", "u"])
    x = np.asarray(traj.grid.x)
    for t, u in zip(traj.times, traj.states):
        ts = format_number(t)
        for xi, ui in zip(x, u.values):
            writer.writerow([ts, format_number(xi), format_number(ui)])
    return buf.getvalue()


def output_root(root=None) -> Path:
    if root is not None:
        return Path(root)
    return Path(os.environ.get(OUTPUT_ENV, DEFAULT_ROOT))


def write_artifacts(art: RunArtifacts, directory: Path) -> RunArtifacts:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "meta.json").write_text(json.dumps(art.meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    if art.status == "ok":
        with open(directory / "diag.csv", "w", newline="") as fh:
            fh.write(diag_csv_text(art.diag))
        if art.scenario.document.get("save_fields") and art.traj is not None:
            with open(directory / "fields.csv", "w", newline="") as fh:
                fh.write(fields_csv_text(art.traj))
    art.directory = directory
    return art


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def run_scenario(source, root=None) -> RunArtifacts:
    """Validate, execute and write artifacts under ``<root>/<name>``.

    ``source`` is a path, a dict or a :class:`Scenario`.  Config errors raise
    :class:`ConfigError` before anything is written.
    """
    if isinstance(source, Scenario):
        scenario = source
    elif isinstance(source, dict):
        scenario = Scenario.from_dict(source)
    else:
        scenario = Scenario.from_file(source)
    art = execute(scenario)
    return write_artifacts(art, output_root(root) / scenario.name)


# ---------------------------------------------------------------- sweeps


def common_mode_h3_distance(u: RealField, v: RealField) -> float:
    """``||u - v||_{H^3}`` over the Fourier modes both grids resolve.

    The grids must share the box; their sizes may differ.
    """
    gu, gv = u.grid, v.grid
    if not (math.isclose(gu.length, gv.length) and math.isclose(gu.left, gv.left)):
        raise ValueError("H3 distance needs a common box")
    m = min(gu.n, gv.n) // 2
    # coefficients of the continuous interpolant, normalised per grid
    cu = np.fft.rfft(u.values)[:m] / gu.n
    cv = np.fft.rfft(v.values)[:m] / gv.n
    k = 2.0 * np.pi * np.arange(m) / gu.length
    weights = np.where(np.arange(m) == 0, 1.0, 2.0) * gu.length * (1 + k**2) ** 3
    return float(np.sqrt(np.sum(weights * np.abs(cu - cv) ** 2)))


def parse_values(text: str) -> list:
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(int(item))
        except ValueError:
            try:
                values.append(float(item))
            except ValueError:
                raise ConfigError(f"sweep value {item!r} is not a number") from None
    if not values:
        raise ConfigError("sweep needs at least one value")
    return values


def sweep(source, axis: str, values, root=None) -> tuple[list[RunArtifacts], Path]:
    """One run per value of ``axis``; failures are recorded and the sweep continues.

    Writes ``<root>/<name>__sweep_<axis>/summary.csv`` with the terminal
    diagnostics of each run and the H^3 distance between consecutive runs.
    """
    base = source if isinstance(source, Scenario) else (
        Scenario.from_dict(source) if isinstance(source, dict) else Scenario.from_file(source)
    )
    base.with_value(axis, _lookup(base.document, axis))  # axis must exist and be numeric
    folder = output_root(root) / f"{base.name}__sweep_{axis}"
    runs = []
    for i, value in enumerate(values):
        try:
            scenario = base.with_value(axis, value)
        except ConfigError as exc:
            meta = {"status": "config_error", "error": str(exc), "value": value}
            runs.append(RunArtifacts(base, "config_error", EXIT_CONFIG, meta))
            continue
        art = execute(scenario)
        art.meta["sweep"] = {"axis": axis, "value": value, "index": i}
        runs.append(write_artifacts(art, folder / f"run_{i:03d}"))
    folder.mkdir(parents=True, exist_ok=True)
    with open(folder / "summary.csv", "w", newline="") as fh:
        fh.write(summary_csv_text(axis, values, runs))
    return runs, folder


def _lookup(doc, axis):
    node = doc
    for key in axis.split("."):
        try:
            node = node[int(key)] if isinstance(node, list) else node[key]
        except (KeyError, IndexError, ValueError, TypeError):
            raise ConfigError(f"unknown sweep axis {axis!r}") from None
    return node


def summary_csv_text(axis: str, values, runs: list[RunArtifacts]) -> str:
    names: list[str] = []
    for art in runs:
        for name in art.terminal():
            if name not in names:
                names.append(name)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([axis, "status", *names, "h3_distance_to_next"])
    for i, (value, art) in enumerate(zip(values, runs)):
        term = art.terminal()
        row = [value, art.status] + [format_number(term[n]) if n in term else "" for n in names]
        nxt = runs[i + 1] if i + 1 < len(runs) else None
        if art.status == "ok" and nxt is not None and nxt.status == "ok":
            try:
                row.append(format_number(common_mode_h3_distance(art.final_state, nxt.final_state)))
            except ValueError:
                row.append("")
        else:
            row.append("")
        writer.writerow(row)
    return buf.getvalue()


__all__ = [
    "SCHEMA",
    "REGISTRY",
    "ConfigError",
    "Scenario",
    "RunArtifacts",
    "execute",
    "run_scenario",
    "sweep",
    "common_mode_h3_distance",
    "diag_csv_text",
    "parse_values",
    "output_root",
]
