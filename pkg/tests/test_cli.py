import json

import pytest

from fracwalk.cli import run


def _run(tmp_path, argv, name="out"):
    out = tmp_path / name
    code = run(argv + ["--out", str(out)])
    return code, out.read_bytes() if out.exists() else b""


def test_renewal_csv(tmp_path):
    code, data = _run(tmp_path, ["renewal", "--law", "power:alpha=0.25", "--n", "4096"])
    assert code == 0
    lines = data.decode().split("\n")
    assert lines[0] == "n,q"
    assert lines[1] == "0,1.0"
    assert len(lines) == 4096 + 3 and lines[-1] == ""
    assert b"\r" not in data


def test_renewal_tables_and_constants(tmp_path):
    code, data = _run(tmp_path, ["renewal", "--law", "power:alpha=0.25", "--n", "64",
                                 "--table", "variance", "--format", "json"])
    rep = json.loads(data)
    assert code == 0
    assert rep["columns"] == ["n", "exact_var", "asymptotic_var", "ratio"]
    assert rep["constants"]["K_alpha"] == pytest.approx(0.33863, abs=1e-5)
    code, data = _run(tmp_path, ["renewal", "--law", "power:alpha=0.25", "--n", "16",
                                 "--table", "corr"])
    assert data.decode().startswith("i,c,trunc_error\n")


def test_variance_report_deterministic(tmp_path):
    argv = ["variance", "--law", "power:alpha=0.25", "--p", "0.5", "--n-list", "8,32",
            "--reps", "400", "--seed", "42"]
    code, a = _run(tmp_path, argv, "a")
    _, b = _run(tmp_path, argv + ["--threads", "3"], "b")
    assert code == 0 and a == b
    rep = json.loads(a)
    assert rep["config"]["seed"] == 42
    assert rep["config"]["law"]["label"] == "power:alpha=0.25"
    assert [r["key"] for r in rep["rows"]] == [8, 32]


def test_meet_estimate(tmp_path):
    code, data = _run(tmp_path, ["meet", "--law", "power:alpha=0.75", "--k", "1", "--depth",
                                 "1000000", "--reps", "20000", "--seed", "1"])
    assert code == 0 and json.loads(data)["estimate"] >= 0.99


def test_simulate_and_rescale(tmp_path):
    code, data = _run(tmp_path, ["simulate", "--law", "delta1", "--p", "0.5", "--n", "10",
                                 "--seed", "3"])
    rows = [r.split(",") for r in data.decode().strip().split("\n")]
    assert rows[0] == ["i", "X", "S"] and rows[1] == ["0", "0", "0"]
    assert abs(int(rows[-1][2])) == 10
    code, data = _run(tmp_path, ["rescale", "--n", "64", "--grid", "0,0.5,1", "--seed", "3"])
    assert data.decode().split("\n")[1] == "0.0,0.0"
    code, data = _run(tmp_path, ["simulate", "--law", "power:alpha=0.25", "--adjusted",
                                 "--n", "50", "--seed", "3", "--format", "json"])
    assert json.loads(data)["diagnostics"]["fresh_coins"] >= 1


def test_other_subcommands(tmp_path):
    code, data = _run(tmp_path, ["fgn", "--H", "0.75", "--n", "8", "--table", "gamma"])
    assert code == 0 and data.decode().startswith("k,gamma\n0,1.0\n")
    code, data = _run(tmp_path, ["hurst", "--exact", "--n-list", "256,512,1024,2048,4096"])
    assert 0.70 <= json.loads(data)["H_hat"] <= 0.78
    code, data = _run(tmp_path, ["maxstats", "--n", "128", "--reps", "200", "--seed", "2"])
    assert code == 0 and json.loads(data)["identity_error"] == 0
    code, data = _run(tmp_path, ["components", "--law", "delta1", "--n", "20", "--reps", "3",
                                 "--seed", "2"])
    assert json.loads(data)["one_component_frequency"] == 1.0
    code, data = _run(tmp_path, ["fkg", "--law", "finite:0.5,0.5", "--n", "32", "--reps", "300",
                                 "--seed", "2"])
    assert code == 0 and json.loads(data)["passed"]


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"law": "power:alpha=0.4", "n": 8, "table": "q"}))
    code, data = _run(tmp_path, ["renewal", "--config", str(cfg), "--format", "json"])
    rep = json.loads(data)
    assert code == 0 and rep["config"]["law"]["alpha"] == 0.4 and len(rep["rows"]) == 9
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["renewal", "--n", "4", "--config", str(cfg)]) == 2


def test_usage_errors(capsys):
    assert run(["nonsense"]) == 2
    assert run(["renewal", "--n", "10", "--bogus-flag"]) == 2
    assert run(["renewal", "--law", "power:alpha=-1", "--n", "4"]) == 2
    assert run(["variance", "--p", "1.5", "--n-list", "4", "--reps", "2", "--seed", "1"]) == 2
    assert "usage" in capsys.readouterr().err


def test_entropy_seed_is_printed(tmp_path, capsys):
    code, _ = _run(tmp_path, ["simulate", "--n", "8"])
    assert code == 0
    assert "seed: " in capsys.readouterr().err


def test_suite_selection(tmp_path):
    code, data = _run(tmp_path, ["suite", "--only", "2,3,6"])
    rep = json.loads(data)
    assert code == 0 and rep["passed"]
    assert [c["number"] for c in rep["criteria"]] == [2, 3, 6]


def test_config_list_and_scalar_values(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"law": "delta1", "n": 10, "depth": 80, "reps": 2, "seed": 1}))
    code, data = _run(tmp_path, ["components", "--config", str(cfg)])
    assert code == 0 and json.loads(data)["config"]["depth"] == 80
    cfg.write_text(json.dumps({"n-list": [8, 16], "reps": 50, "seed": 1}))
    code, data = _run(tmp_path, ["variance", "--config", str(cfg), "--reps", "60"])
    rep = json.loads(data)
    assert rep["config"]["n_list"] == [8, 16] and rep["config"]["reps"] == 60
