"""Built-in scenario templates (the acceptance scenarios plus small demos).

``template(name)`` returns a fresh copy that can be edited and passed to
:func:`dispersia.scenarios.run_scenario`.
"""
from __future__ import annotations

import copy


def _grid(n, length, left):
    return {"n": n, "length": float(length), "left": float(left)}


def _time(dt, t_end, save_stride):
    return {"dt": dt, "t_end": t_end, "save_stride": save_stride}


def _rough_kdv_data():
    return {
        "kind": "composite",
        "parts": [
            {
                "kind": "rough_left",
                "s": 1.2,
                "amplitude": 0.5,
                "window": {"start": -60.0, "stop": -2.0, "ramp": 2.0},
                "band": {"k_min": 1.0, "k_max": 6.0},
            },
            {"kind": "closed_form", "name": "gaussian", "params": {"amplitude": 0.3, "center": 5.0, "width": 3.0}},
        ],
    }


def _rough_quasilinear_data():
    return {
        "kind": "composite",
        "parts": [
            {
                "kind": "rough_left",
                "s": 7.2,
                "amplitude": 0.1,
                "window": {"start": -60.0, "stop": -2.0, "ramp": 8.0},
                "band": {"k_min": 1.0, "k_max": 6.0},
            },
            {"kind": "closed_form", "name": "gaussian", "params": {"amplitude": 0.3, "center": 5.0, "width": 3.0}},
        ],
    }


# quasilinear steps: 0.01 / m with m chosen so that dt <= half the stability limit of the data
QUASILINEAR_ROUGH_SUBSTEPS = {4096: 43, 8192: 341}

TEMPLATES: dict[str, dict] = {
    "kdv_soliton": {
        "name": "kdv_soliton",
        "description": "KdV soliton 3c sech^2(sqrt(c) x / 2), c = 1, compared with its translate",
        "equation": {"name": "gkdv", "power": 1},
        "grid": _grid(1024, 60, -30),
        "time": _time(1e-3, 1.0, 100),
        "initial_data": {"kind": "closed_form", "name": "kdv_soliton", "params": {"c": 1.0, "center": 0.0}},
        "diagnostics": [{"name": "conserved"}, {"name": "closed_form_error", "params": {"speed": 1.0}}],
        "seed": 0,
    },
    "bbm_solitary": {
        "name": "bbm_solitary",
        "description": "BBM solitary wave with speed c = 1.5",
        "equation": {"name": "bbm"},
        "grid": _grid(2048, 100, -50),
        "time": _time(0.01, 2.0, 20),
        "initial_data": {"kind": "closed_form", "name": "bbm_solitary", "params": {"c": 1.5, "center": 0.0}},
        "diagnostics": [
            {"name": "conserved"},
            {"name": "closed_form_error", "params": {"speed": 1.5}},
            {"name": "peak"},
        ],
        "seed": 0,
    },
    "bbm_zero": {
        "name": "bbm_zero",
        "description": "zero data stays zero",
        "equation": {"name": "bbm"},
        "grid": _grid(256, 20, -10),
        "time": _time(0.01, 1.0, 10),
        "initial_data": {"kind": "closed_form", "name": "zero", "params": {}},
        "diagnostics": [{"name": "conserved"}, {"name": "max_abs"}],
        "seed": 0,
    },
    "quasilinear_eps": {
        "name": "quasilinear_eps",
        "description": "parabolic regularisation of the quasilinear model; sweep equation.viscosity",
        "equation": {"name": "quasilinear", "viscosity": 1e-2},
        "grid": _grid(512, 40, -20),
        "time": _time(2.5e-5, 0.05, 400),
        "initial_data": {"kind": "closed_form", "name": "gaussian", "params": {"amplitude": 0.5, "center": 0.0, "width": 2.0}},
        "diagnostics": [{"name": "conserved"}, {"name": "sobolev_norm", "params": {"s": 3}}],
        "seed": 0,
    },
    "kdv_rough_propagation": {
        "name": "kdv_rough_propagation",
        "description": "KdV with rough data on x < 0 and a smooth bump on the right",
        "equation": {"name": "gkdv", "power": 1},
        "grid": _grid(4096, 400, -200),
        "time": _time(2e-3, 0.5, 25),
        "initial_data": _rough_kdv_data(),
        "diagnostics": [
            {"name": "halfline_energy", "params": {"j": 2, "x0": 0.0, "eps": 0.1, "v": 1.0}},
            {"name": "smoothing_integral", "params": {"l": 1, "v": 1.0, "eps": 0.1, "b": 1.0}},
        ],
        "seed": 7,
    },
    "quasilinear_rough_propagation": {
        "name": "quasilinear_rough_propagation",
        "description": "quasilinear model with H^7-scale rough data on x < 0",
        "equation": {"name": "quasilinear", "viscosity": 1e-3},
        "grid": _grid(4096, 400, -200),
        "time": _time(0.01 / QUASILINEAR_ROUGH_SUBSTEPS[4096], 0.5, QUASILINEAR_ROUGH_SUBSTEPS[4096]),
        "initial_data": _rough_quasilinear_data(),
        "diagnostics": [
            {"name": "halfline_energy", "params": {"j": 8, "x0": 0.0, "eps": 0.1, "v": 1.0}},
            {"name": "smoothing_integral", "params": {"l": 7, "v": 1.0, "eps": 0.1, "b": 1.0}},
        ],
        "seed": 7,
    },
    "airy_blowup": {
        "name": "airy_blowup",
        "description": "linear Airy flow of the J = 3, c = 1e-3 blow-up data",
        "equation": {"name": "airy"},
        "grid": _grid(2**14, 200, -100),
        "time": _time(0.5, 3.0, 1),
        "initial_data": {"kind": "blowup_schedule", "J": 3, "c": 1e-3},
        "diagnostics": [
            {"name": "roughness", "params": {"x0": 0.0, "radius": 2}},
            {"name": "jumps", "params": {"threshold": 5e-4, "interval": [-0.5, 0.5]}},
        ],
        "seed": 0,
    },
    "bbm_kink": {
        "name": "bbm_kink",
        "description": "BBM with a corner at x = 0; the corner should not move",
        "equation": {"name": "bbm"},
        "grid": _grid(2048, 100, -50),
        "time": _time(0.01, 5.0, 50),
        "initial_data": {
            "kind": "composite",
            "parts": [
                {"kind": "closed_form", "name": "corner", "params": {"amplitude": 0.5, "center": 0.0, "rate": 1.0}},
                {"kind": "closed_form", "name": "gaussian", "params": {"amplitude": 0.3, "center": 4.0, "width": 1.0}},
            ],
        },
        "diagnostics": [{"name": "jumps", "params": {"threshold": 0.3, "interval": [-2.0, 2.0]}}],
        "seed": 0,
    },
    "dp_peakon": {
        "name": "dp_peakon",
        "description": "single DP peakon exp(-|x + 10|), mollified at 2dx",
        "equation": {"name": "dp"},
        "grid": _grid(8192, 60, -30),
        "time": _time(0.0025, 1.5, 1),
        "mollify": 2.0,
        "initial_data": {"kind": "peakons", "positions": [-10.0], "amplitudes": [1.0]},
        "diagnostics": [
            {"name": "conserved"},
            {"name": "jumps", "params": {"threshold": 1.0, "interval": [-11.0, -7.0]}},
            {"name": "characteristics", "params": {"seeds": [-10.0], "velocity": "u"}},
        ],
        "seed": 0,
    },
    "brinkman_corner": {
        "name": "brinkman_corner",
        "description": "Brinkman density with a corner at x = 1, mollified at 2dx",
        "equation": {"name": "brinkman"},
        "grid": _grid(8192, 60, -30),
        "time": _time(0.005, 2.0, 1),
        "mollify": 2.0,
        "initial_data": {
            "kind": "composite",
            "parts": [
                {"kind": "closed_form", "name": "corner", "params": {"amplitude": 0.4, "center": 1.0, "rate": 1.0}},
                {"kind": "closed_form", "name": "gaussian", "params": {"amplitude": 0.4, "center": -1.0, "width": 1.0}},
            ],
        },
        "diagnostics": [
            {"name": "conserved"},
            {"name": "jumps", "params": {"threshold": 0.2, "interval": [0.0, 2.0]}},
            {"name": "characteristics", "params": {"seeds": [1.0], "velocity": "brinkman"}},
        ],
        "seed": 0,
    },
    "dp_two_peakons": {
        "name": "dp_two_peakons",
        "description": "two DP peakons (amplitudes 1 and 0.5, separation 10) against the peakon ODE",
        "equation": {"name": "dp"},
        "grid": _grid(4096, 120, -60),
        "time": _time(0.005, 3.0, 20),
        "mollify": 2.0,
        "initial_data": {"kind": "peakons", "positions": [-5.0, 5.0], "amplitudes": [1.0, 0.5]},
        "diagnostics": [{"name": "conserved"}, {"name": "peakon_ode", "params": {"dt": 0.001}}],
        "seed": 0,
    },
}


def template(name: str) -> dict:
    try:
        return copy.deepcopy(TEMPLATES[name])
    except KeyError:
        raise KeyError(f"unknown template {name!r}; known: {sorted(TEMPLATES)}") from None


def names() -> list[str]:
    return list(TEMPLATES)
