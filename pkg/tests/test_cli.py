import csv
import json

import numpy as np
import pytest

from adhfric.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main, tangent_check
from adhfric.scenarios import apply_cli_overrides, default_config


def _write(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_selftest_exit_zero(capsys):
    assert main(["selftest"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 8


def test_missing_material_exit_one(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"scenario": "strip"})
    assert main(["run", cfg]) == EXIT_CONFIG
    assert "material" in capsys.readouterr().err


def test_unknown_key_exit_one(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"scenario": "strip", "material": {}, "load": {"umax": 3}})
    assert main(["run", "--config", cfg]) == EXIT_CONFIG
    assert "load.umax" in capsys.readouterr().err


def test_bad_resolution_scale_exit_one(tmp_path):
    cfg = _write(tmp_path / "c.json", {"scenario": "strip", "material": {}})
    assert main(["run", cfg, "--resolution-scale", "-1"]) == EXIT_CONFIG


def test_unreadable_config_exit_one(tmp_path):
    (tmp_path / "c.json").write_text("{not json")
    assert main(["run", str(tmp_path / "c.json")]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_short_strip_run(tmp_path):
    cfg = {"scenario": "strip", "material": {"nu": 0.2}, "load": {"u_max": 1.0, "n_steps": 4}}
    out = tmp_path / "out"
    code = main(["run", _write(tmp_path / "c.json", cfg), "--out", str(out),
                 "--resolution-scale", "0.25"])
    assert code == EXIT_OK
    forces = _rows(out / "forces.csv")
    assert len(forces) == 5 and float(forces[0]["F_y"]) == 0.0
    assert float(forces[-1]["F_y"]) > 0.0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["converged"] and summary["scenario"] == "strip"


@pytest.mark.slow
def test_tensile_cap_exit_two_with_partial_output(tmp_path):
    cfg = {"scenario": "cap", "material": {"nu": 0.49},
           "mesh": {"n_s": 40, "n_t": 10},
           "load": {"F_n": [-0.45], "detach_F_n": [], "match_nonadhesive": False, "n_shear": 40}}
    out = tmp_path / "out"
    assert main(["run", _write(tmp_path / "c.json", cfg), "--out", str(out)]) == EXIT_SOLVER
    rows = _rows(out / "forces.csv")
    assert rows
    summary = json.loads((out / "summary.json").read_text())
    assert summary["solver_failure"]
    # the force is zero until shear starts
    pre = [r for r in rows if r["stage"] != "shear"]
    assert pre and all(float(r["F_t"]) == pytest.approx(0.0, abs=1e-10) for r in pre)


@pytest.mark.parametrize("scenario,law", [("strip", "di"), ("cylinders", "frictionless")])
def test_tangent_check(scenario, law):
    cfg = apply_cli_overrides(default_config(scenario), law=law, resolution_scale=0.3)
    out = tangent_check(cfg, steps=2)
    assert out["converged"] and out["passed"], out
    assert out["statuses"]["far"] < sum(out["statuses"].values())
