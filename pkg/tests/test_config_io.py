from pathlib import Path

import numpy as np
import pytest

from conftest import INLET_MODES, TE_MODES
from mhdshock import io
from mhdshock.config import RunConfig, dump_config, load_config, parse_config
from mhdshock.errors import ConfigError
from mhdshock.spectral import SpectralGrid

DEMO = Path(__file__).resolve().parents[1] / "configs" / "demo.toml"


def test_demo_config_loads():
    cfg = load_config(DEMO)
    assert cfg.solver.epsilon == 1e-3
    assert cfg.inlet_modes == INLET_MODES
    assert cfg.Te_modes == TE_MODES


def test_dump_parse_round_trip():
    cfg = RunConfig(inlet_modes=INLET_MODES, Te_modes=TE_MODES).with_solver(epsilon=2e-3, N1=17)
    assert parse_config(dump_config(cfg)) == cfg


def test_refined_resolution():
    s = RunConfig().refined(1).solver
    assert (s.N1, s.N2, s.N3) == (65, 16, 16)


@pytest.mark.parametrize("text,line", [
    ("[solver]\nN1 = 33\nepsilon = -1.0\n", 3),
    ("[solver]\nN1 = 3.5\n", 2),
    ("[gas]\ngamma = 1.0\n", 2),
    ("[solver]\nbogus = 1\n", 2),
    ("[geometry]\nr1 = 1.0\n\n[inlet.modes]\nU20 = [[\"cos\", \"cos\", 1, 0, 1.0]]\n", 5),
    ("[solver]\nN1 = \n", 2),
])
def test_errors_are_line_anchored(text, line):
    with pytest.raises(ConfigError) as e:
        parse_config(text, "run.toml")
    assert e.value.line == line
    assert f"run.toml:{line}:" in str(e.value)


def test_unknown_section():
    with pytest.raises(ConfigError) as e:
        parse_config("[solver]\nN1 = 9\n[extra]\na = 1\n")
    assert e.value.line == 3


def test_field_dump_round_trip(tmp_path):
    g = SpectralGrid(9, 4, 4, 0.4, 1.2, 1.6)
    a = np.random.default_rng(0).normal(size=g.shape)
    io.dump_fields(tmp_path, {"V1": (a, "cc"), "V7": (a[0], "cc")}, g)
    raw = np.frombuffer((tmp_path / "V1.bin").read_bytes(), dtype="<f8")
    assert raw.size == a.size
    out, meta = io.load_fields(tmp_path)
    assert np.array_equal(out["V1"][0], a) and out["V1"][1] == "cc"
    assert np.array_equal(out["V7"][0], a[0])
    assert meta["N1"] == 9
    _, side = io.load_field(tmp_path, "V1")
    assert side["modes"] == [5, 5] and side["dtype"] == "<f8"


def test_csv_round_trip(tmp_path):
    cols = {"r": np.linspace(0, 1, 4), "name": ["a", "b", "c", "d"]}
    io.write_csv(tmp_path / "t.csv", cols)
    back = io.read_csv(tmp_path / "t.csv")
    assert np.array_equal(back["r"], cols["r"]) and back["name"] == cols["name"]


def test_jsonable():
    from mhdshock.state import Regime
    d = io.to_jsonable({"a": np.float64(1.5), "b": np.arange(2), "c": Regime.MIXED,
                        "d": float("inf"), "e": np.bool_(True)})
    assert d == {"a": 1.5, "b": [0, 1], "c": Regime.MIXED.value, "d": "inf", "e": True}
