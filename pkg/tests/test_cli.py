import json
from pathlib import Path

import pytest

from backpressure.cli import main
from backpressure.config import ConfigError, config_from_dict, load_config

TINY = """\
nodes: [12]
networks: 1
realizations: 2
T: 40
schemes: [BP, EDR-rbar]
"""


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.yaml"
    p.write_text(TINY)
    return p


def test_sweep_csv(tiny, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(tiny), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "scheme,nodes,instances,mean_delay,delay_ci95,delivery_rate,delivery_std"
    assert len(lines) == 3


def test_run_repeatable(tiny, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--config", str(tiny), "--seed", "7", "--out", str(a)]) == 0
    assert main(["run", "--config", str(tiny), "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_trace_json(tiny, tmp_path):
    out = tmp_path / "run.json"
    assert main(["run", "--config", str(tiny), "--format", "json", "--trace", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc["records"]) == {"BP", "EDR-rbar"}
    row = doc["rows"][0]
    assert row["packets"] == len(doc["records"]["BP"])
    assert main(["run", "--config", str(tiny), "--trace"]) == 2


def test_missing_config(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["sweep", "--config", str(tmp_path / "nope.yaml"), "--out", str(out)]) != 0
    assert not out.exists()


@pytest.mark.parametrize("text", ["nodes: [12\n", "colour: blue\n", "schemes: [XYZ]\n", "traffic: {pattern: steady}\n", "nodes: [1]\n", "- 1\n"])
def test_bad_config(tmp_path, text):
    p = tmp_path / "bad.yaml"
    p.write_text(text)
    with pytest.raises(ConfigError):
        load_config(p)
    assert main(["sweep", "--config", str(p)]) == 2


def test_unknown_flag():
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--frobnicate"])
    assert exc.value.code != 0


def test_config_defaults_and_overrides():
    cfg = config_from_dict({"nodes": 30, "traffic": {"pattern": "bursty"}, "mobility": {"period": 50}})
    assert cfg.nodes == [30] and cfg.traffic.pattern == "bursty" and cfg.mobility.period == 50


def test_lemma1(tmp_path, capsys):
    assert main(["lemma1"]) == 0
    out = capsys.readouterr().out
    assert "False" not in out
    assert main(["lemma1", "--format", "json", "--out", str(tmp_path / "l.json")]) == 0
    doc = json.loads((tmp_path / "l.json").read_text())
    assert all(r["passed"] for r in doc["rows"])


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "configs").glob("*.yaml")), ids=lambda p: p.name)
def test_preset_configs_load(path):
    cfg = load_config(path)
    assert cfg.nodes and cfg.schemes
