import json
import math

import numpy as np
import pytest

from dispersia import scenarios, templates
from dispersia.fieldkit import RealField, make_grid
from dispersia.scenarios import (
    EXIT_UNSTABLE,
    ConfigError,
    Scenario,
    common_mode_h3_distance,
    execute,
    parse_values,
    run_scenario,
    sweep,
)
from dispersia.solvers import InstabilityError


def _read_diag(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "t,name,value"
    return [line.split(",") for line in lines[1:]]


def _small_kdv():
    doc = templates.template("kdv_soliton")
    doc["grid"]["n"] = 512
    doc["time"].update(dt=2e-3, t_end=0.2, save_stride=20)
    return doc


def test_every_template_validates():
    for name in templates.names():
        assert Scenario.from_dict(templates.template(name)).name == name
    with pytest.raises(KeyError):
        templates.template("nope")


def test_zero_bbm_stays_zero(tmp_path):
    art = run_scenario(templates.template("bbm_zero"), root=tmp_path)
    assert art.exit_code == 0
    rows = _read_diag(tmp_path / "bbm_zero" / "diag.csv")
    assert rows and all(float(value) == 0.0 for _, _, value in rows)
    meta = json.loads((tmp_path / "bbm_zero" / "meta.json").read_text())
    assert meta["status"] == "ok"
    assert meta["versions"]["numpy"] == np.__version__


def test_malformed_json_writes_nothing(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x", ')
    out = tmp_path / "out"
    with pytest.raises(ConfigError):
        run_scenario(bad, root=out)
    assert not out.exists()


@pytest.mark.parametrize("path", [("time", "dt"), ("grid", "n"), ("grid", "length")])
def test_missing_required_keys(path):
    doc = _small_kdv()
    del doc[path[0]][path[1]]
    with pytest.raises(ConfigError, match=path[1]):
        Scenario.from_dict(doc)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d["equation"].update(name="nls"),
        lambda d: d["grid"].update(n=511),
        lambda d: d["time"].update(dt=-1.0),
        lambda d: d.update(diagnostics=[{"name": "no_such_diagnostic"}]),
        lambda d: d.update(diagnostics=[{"name": "sobolev_norm", "params": {"s": "three"}}]),
        lambda d: d.update(diagnostics=[{"name": "peakon_ode", "params": {"dt": 0.01}}]),
        lambda d: d["time"].update(dt=1.0),  # violates the stability rule at t = 0
    ],
)
def test_invalid_documents(mutate):
    doc = _small_kdv()
    mutate(doc)
    with pytest.raises(ConfigError):
        Scenario.from_dict(doc)


def test_kdv_soliton_meta_records_small_drift(tmp_path):
    art = run_scenario(_small_kdv(), root=tmp_path)
    meta = json.loads((tmp_path / "kdv_soliton" / "meta.json").read_text())
    assert meta["conserved_drift"]["mass"] <= 1e-6
    assert meta["conserved_drift"]["l2_squared"] <= 1e-6
    assert art.terminal()["closed_form_error"] < 1e-6
    assert list(art.times) == pytest.approx([0.0, 0.04, 0.08, 0.12, 0.16, 0.2])


def test_instability_exit_code(tmp_path, monkeypatch):
    def explode(u0, config):
        raise InstabilityError("boom", 0.125)

    monkeypatch.setattr(scenarios, "run", explode)
    art = run_scenario(_small_kdv(), root=tmp_path)
    assert art.exit_code == EXIT_UNSTABLE
    meta = json.loads((tmp_path / "kdv_soliton" / "meta.json").read_text())
    assert meta["status"] == "unstable"
    assert meta["failure_time"] == 0.125
    assert not (tmp_path / "kdv_soliton" / "diag.csv").exists()


def test_runs_are_byte_identical(tmp_path):
    doc = templates.template("bbm_solitary")
    doc["time"]["t_end"] = 0.2
    run_scenario(doc, root=tmp_path / "a")
    run_scenario(doc, root=tmp_path / "b")
    a = (tmp_path / "a" / "bbm_solitary" / "diag.csv").read_bytes()
    b = (tmp_path / "b" / "bbm_solitary" / "diag.csv").read_bytes()
    assert a == b
    assert b"\r" not in a


def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv(scenarios.OUTPUT_ENV, str(tmp_path / "env"))
    art = run_scenario(templates.template("bbm_zero"))
    assert art.directory == tmp_path / "env" / "bbm_zero"


def test_save_fields(tmp_path):
    doc = templates.template("bbm_zero")
    doc["save_fields"] = True
    doc["time"].update(t_end=0.02, save_stride=1)
    run_scenario(doc, root=tmp_path)
    lines = (tmp_path / "bbm_zero" / "fields.csv").read_text().splitlines()
    assert lines[0] == "t,x,u"
    assert len(lines) == 1 + 3 * 256


def test_single_value_sweep_matches_run(tmp_path):
    doc = _small_kdv()
    art = run_scenario(doc, root=tmp_path / "run")
    runs, folder = sweep(doc, "equation.power", [1], root=tmp_path / "sweep")
    assert runs[0].status == "ok"
    a = (tmp_path / "run" / "kdv_soliton" / "diag.csv").read_bytes()
    b = (folder / "run_000" / "diag.csv").read_bytes()
    assert a == b
    assert art.terminal() == runs[0].terminal()


def test_grid_sweep_summary(tmp_path):
    doc = _small_kdv()
    runs, folder = sweep(doc, "grid.n", [256, 512], root=tmp_path)
    assert [r.status for r in runs] == ["ok", "ok"]
    lines = (folder / "summary.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == "grid.n" and header[-1] == "h3_distance_to_next"
    first = lines[1].split(",")
    assert float(first[-1]) < 1e-3
    assert lines[2].split(",")[-1] == ""


def test_sweep_records_bad_values_and_continues(tmp_path):
    runs, folder = sweep(_small_kdv(), "grid.n", [255, 256], root=tmp_path)
    assert [r.status for r in runs] == ["config_error", "ok"]
    with pytest.raises(ConfigError):
        sweep(_small_kdv(), "grid.nope", [1], root=tmp_path)
    with pytest.raises(ConfigError):
        sweep(_small_kdv(), "name", [1], root=tmp_path)


def test_parse_values():
    assert parse_values("1, 2.5,1e-3") == [1, 2.5, 1e-3]
    with pytest.raises(ConfigError):
        parse_values("1,x")
    with pytest.raises(ConfigError):
        parse_values(" , ")


def test_h3_distance_across_grids():
    coarse, fine = make_grid(64, 2 * np.pi, -np.pi), make_grid(128, 2 * np.pi, -np.pi)
    u = RealField.from_function(coarse, np.cos)
    v = RealField.from_function(fine, np.cos)
    assert common_mode_h3_distance(u, v) < 1e-10
    w = RealField.from_function(fine, lambda x: np.cos(x) + 0.1 * np.cos(2 * x))
    # ||0.1 cos 2x||_{H^3}^2 = 0.01 * pi * 5^3
    assert common_mode_h3_distance(u, w) == pytest.approx(math.sqrt(0.01 * np.pi * 125), rel=1e-12)


def test_airy_scenario_is_exact():
    doc = {
        "name": "airy_cos",
        "equation": {"name": "airy"},
        "grid": {"n": 64, "length": 2 * np.pi, "left": -np.pi},
        "time": {"dt": 0.25, "t_end": 1.0, "save_stride": 1},
        "initial_data": {"kind": "closed_form", "name": "cosine", "params": {"amplitude": 1.0}},
        "diagnostics": [{"name": "max_abs"}],
    }
    art = execute(Scenario.from_dict(doc))
    assert np.allclose(art.final_state.values, np.cos(art.final_state.grid.x + 1.0), atol=1e-13)
    assert np.allclose(art.series("max_abs"), 1.0, atol=1e-3)
