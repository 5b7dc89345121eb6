import json

import numpy as np
import pytest

from mhdshock import io
from mhdshock.cli import run_cli

SMALL = """
[solver]
epsilon = {eps}
N1 = 9
N2 = 4
N3 = 4

[inlet.modes]
U10 = [["cos", "cos", 1, 1, 0.5]]

[exit.Te_modes]
modes = [["cos", "cos", 1, 0, 0.5]]
"""


@pytest.fixture
def cfg_file(tmp_path):
    def make(eps=0.0):
        p = tmp_path / f"run_{eps}.toml"
        p.write_text(SMALL.format(eps=eps))
        return str(p)
    return make


def test_background_command(tmp_path, cfg_file):
    out = tmp_path / "bg"
    assert run_cli(["background", "--config", cfg_file(), "--out", str(out), "--samples", "41"]) == 0
    down = io.read_csv(out / "downstream.csv")
    dP = np.diff(down["P_plus"])
    assert np.all(dP > 0) or np.all(dP < 0)
    for k in ("d0", "d1", "d", "d4"):
        assert np.all(down[k] > 0)
    pos = json.loads((out / "positivity.json").read_text())
    assert pos["all_positive"] and pos["super_alfvenic"]
    up = io.read_csv(out / "upstream.csv")
    assert np.all(up["M2_minus"] > 1)


def test_solve_at_zero_epsilon(tmp_path, cfg_file):
    out = tmp_path / "s0"
    assert run_cli(["solve", "--config", cfg_file(), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["iterations"] == 1 and rep["converged"]
    assert rep["summary"]["norm_Xi"] <= 1e-12 and rep["summary"]["V7_sup"] <= 1e-12
    assert "wall_seconds" in json.loads((out / "timing.json").read_text())


def test_solve_then_report(tmp_path, cfg_file):
    out = tmp_path / "s1"
    assert run_cli(["solve", "--config", cfg_file(1e-3), "--out", str(out)]) == 0
    first = json.loads((out / "report.json").read_text())["residuals"]
    assert run_cli(["report", "--fields", str(out / "fields"), "--out", str(out / "re")]) == 0
    again = json.loads((out / "re" / "residuals.json").read_text())
    for k in ("mhd", "rh", "F", "deformation_curl", "exit"):
        assert again[k] == pytest.approx(first[k], rel=1e-9, abs=1e-15)


def test_sweep_exit_pressure(tmp_path, cfg_file):
    out = tmp_path / "sw"
    assert run_cli(["sweep", "--config", cfg_file(), "--out", str(out), "--param", "Pe",
                    "--n", "4"]) == 0
    rows = io.read_csv(out / "sweep_Pe.csv")
    d = np.diff(rows["rs"])
    assert np.all(d > 0) or np.all(d < 0)
    assert np.all(rows["converged"] == 1)


def test_march_and_refine(tmp_path, cfg_file):
    out = tmp_path / "m"
    assert run_cli(["march", "--config", cfg_file(1e-3), "--out", str(out), "--refine", "1"]) == 0
    fields, meta = io.load_fields(out / "upstream")
    assert meta["N2"] == 8
    rep = json.loads((out / "march.json").read_text())
    assert 0 < rep["deviation_sup"] < 1e-2


def test_classify(tmp_path, capsys):
    p = tmp_path / "states.json"
    p.write_text(json.dumps({"gamma": 1.4,
                             "upstream": {"U1": 2.0, "U2": 0, "U3": 0, "P": 1 / 1.4,
                                          "S": 1 / 1.4, "kappa": 0.3},
                             "downstream": {"U1": 0.75, "U2": 0, "U3": 0, "P": 4.5 / 1.4,
                                            "S": 4.5 / 1.4 / (8 / 3) ** 1.4, "kappa": 0.3}}))
    assert run_cli(["classify", str(p)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["upstream"]["regime"] == "purely_hyperbolic"
    assert out["discontinuity"] == "shock"


def test_bad_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("[solver]\nN1 = 9\nepsilon = -1\n")
    assert run_cli(["solve", "--config", str(p), "--out", str(tmp_path / "x")]) == 2
    err = capsys.readouterr().err
    assert "config error" in err and "bad.toml:3" in err
