import csv
import io as stdio
import json

import numpy as np
import pytest

from eacw import io
from eacw.channels import ChannelSet, counterexample_pair, depolarizing, identity, random_channel
from eacw.cli import main, run
from eacw.coding.codes import counterexample_code
from eacw.linalg import ValidationError


@pytest.fixture
def files(tmp_path):
    paths = {}
    sets = {
        "example1": counterexample_pair(),
        "identity2": ChannelSet((identity(2),), ("id",)),
        "depolarized": ChannelSet((depolarizing(0.05, 2),), ("dep",)),
    }
    for name, cs in sets.items():
        p = tmp_path / f"{name}.json"
        io.save_channel_set(cs, p)
        paths[name] = str(p)
    return paths


def test_channel_json_round_trip():
    ch = random_channel(2, 3, np.random.default_rng(0))
    back = io.channel_from_json(json.loads(json.dumps(io.channel_to_json(ch))))
    assert np.array_equal(back.kraus, ch.kraus)
    cs = counterexample_pair()
    back = io.channel_set_from_json(io.channel_set_to_json(cs))
    assert back.labels == cs.labels
    assert all(np.array_equal(a.kraus, b.kraus) for a, b in zip(back, cs))


def test_channel_json_diagnostics():
    good = io.channel_to_json(identity(2))
    bad = dict(good, kraus=[[[[1, 0], [0, 0]], [[0, 0], [1]]]])
    with pytest.raises(ValidationError, match=r"kraus\[0\]\[1\]\[1\]"):
        io.channel_from_json(bad)
    with pytest.raises(ValidationError, match="dim_in"):
        io.channel_from_json({"dim_out": 2, "kraus": good["kraus"]})
    scaled = dict(good, kraus=[[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]])
    with pytest.raises(ValidationError, match="trace preserving"):
        io.channel_from_json(scaled)
    with pytest.raises(ValidationError, match=r"channels\[1\]"):
        io.channel_set_from_json({"labels": ["a", "b"], "channels": [good, scaled]})
    with pytest.raises(ValidationError, match="labels"):
        io.channel_set_from_json({"labels": ["a"], "channels": [good, good]})


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"labels": ["a"],\n "channels": [}')
    with pytest.raises(ValidationError, match="line 2"):
        io.load_channel_set(p)


def test_code_export():
    obj = io.code_to_json(counterexample_code(1).dense())
    assert obj["M"] == 5 and obj["L"] == 1 and len(obj["povm"]) == 5
    json.dumps(obj)


def test_twelve_significant_digits():
    assert io.round_floats({"x": [1 / 3]}) == {"x": [0.333333333333]}
    assert io.csv_text([{"a": 2 / 3}]) == "a\n0.666666666667\n"


def test_cli_capacity(files, capsys):
    code, text = run(["capacity", "single", "--input", files["identity2"]])
    assert code == 0 and abs(json.loads(text)["value"] - 2.0) <= 1e-6
    code, text = run(["capacity", "compound", "--input", files["example1"]])
    comp = json.loads(text)
    assert code == 0 and comp["value"] < np.log2(3)
    assert set(comp) >= {"value", "iterations", "certified_gap", "worst_mixture", "optimizer_diag"}
    code, text = run(["capacity", "avqc", "--input", files["example1"], "--tol", "1e-6"])
    assert code == 0 and json.loads(text)["value"] <= comp["value"] + 1e-7
    code, _ = run(["capacity", "single", "--input", files["example1"]])
    assert code == 1


def test_cli_input_errors(tmp_path, files):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["capacity", "single", "--input", str(bad)])[0] == 1
    assert run(["capacity", "single", "--input", str(tmp_path / "missing.json")])[0] == 1
    assert run(["distance", files["example1"], files["identity2"]])[0] == 1


def test_cli_nonconvergence(files):
    code, text = run(["capacity", "compound", "--input", files["example1"], "--max-iter", "2"])
    assert code == 2
    assert json.loads(text)["converged"] is False


def test_cli_simulate_counterexample():
    code, text = run(["simulate", "counterexample", "--n", "3", "--output", "csv"])
    rows = list(csv.DictReader(stdio.StringIO(text)))
    assert code == 0 and len(rows) == 2
    assert rows[0]["M"] == "53"
    assert abs(float(rows[0]["bound"]) - 27 / 53) <= 1e-11
    assert abs(float(rows[0]["average"]) - 26 / 53) <= 1e-11


def test_cli_simulate_checks():
    code, text = run(["simulate", "encode-check", "--d", "2", "--k", "2", "--sigma", "diag:0.7,0.3"])
    assert code == 0 and json.loads(text)["residual"] <= 1e-9
    code, text = run(["simulate", "robustify", "--S", "2", "--n", "4", "--trials", "1000", "--seed", "7"])
    assert code == 0 and json.loads(text)["counterexamples"] == 0
    assert run(["simulate", "max-from-avg"])[0] == 0
    assert run(["simulate", "mutual-gap", "--k", "1"])[0] == 0
    assert run(["simulate", "encode-check", "--sigma", "diag:0.7"])[0] == 1


def test_cli_simulate_pgm_and_permute():
    code, text = run(["simulate", "pgm"])
    assert code == 0 and json.loads(text)["average"] < 0.25
    code, text = run(["simulate", "permute-avqc", "--n", "2", "--K", "2"])
    out = json.loads(text)
    assert code == 0 and out["identity_residual"] <= 1e-10 and out["L"] == 4


def test_cli_distance(files):
    code, text = run(["distance", files["example1"], files["example1"]])
    out = json.loads(text)
    assert code == 0 and out["distance"] == 0 and out["holds"]
    code, text = run(["distance", files["identity2"], files["depolarized"]])
    assert code == 0 and json.loads(text)["holds"]


def test_cli_manifest_replay(files, tmp_path, capsys):
    m = tmp_path / "run.json"
    assert main(["capacity", "single", "--input", files["identity2"], "--manifest", str(m)]) == 0
    manifest = json.loads(m.read_text())
    assert manifest["command"][:2] == ["capacity", "single"]
    assert files["identity2"] in manifest["inputs"]
    capsys.readouterr()
    assert main(["replay", str(m)]) == 0
    assert json.loads(capsys.readouterr().out)["reproduced"] is True


def test_cli_example_output(capsys):
    assert main(["example", "example1"]) == 0
    cs = io.channel_set_from_json(json.loads(capsys.readouterr().out))
    assert cs.labels == ("N1", "N2")
