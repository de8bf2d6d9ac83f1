import json
from pathlib import Path

import pytest

from qtypical.cli import main
from qtypical.consistency import CHUNK, eval_inequalities, make_batch

SMALL_SEPARATING = {
    "name": "mini_separating",
    "kind": "packet_pair",
    "grid": {"n": 1024, "length": 128.0},
    "packets": [
        {"center": -4.0, "momentum": -2.5, "sigma": 1.0},
        {"center": 4.0, "momentum": 2.5, "sigma": 1.0},
    ],
    "horizon": 8.0,
    "n_samples": 16,
    "mode": "separating",
    "seed": 3,
    "bohmian": {"n_paths": 96, "dt": 0.01, "n_record": 9},
}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("gaussian_crossing", "separating_packets", "two_slit",
                 "free_gaussian"):
        assert name in out


def test_run_scenario_small_separating(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_SEPARATING)
    code = main(["run-scenario", "--config", cfg,
                 "--out-dir", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 0, out
    scen = tmp_path / "out" / "mini_separating"
    assert (scen / "series.csv").is_file()
    assert (scen / "effective_config.json").is_file()
    report = json.loads((scen / "report.json").read_text())
    assert report["passed"]
    for verdict in report["verdicts"]:
        assert {"name", "passed", "value", "eps", "detail"} <= set(verdict)
    header = (scen / "series.csv").read_text().splitlines()[0]
    assert header.startswith("t,")


def test_run_scenario_seed_override_changes_hash(tmp_path):
    cfg = write_config(tmp_path, SMALL_SEPARATING)
    main(["run-scenario", "--config", cfg, "--out-dir", str(tmp_path / "a")])
    main(["run-scenario", "--config", cfg, "--seed", "9",
          "--out-dir", str(tmp_path / "b")])
    rep_a = json.loads(
        (tmp_path / "a" / "mini_separating" / "report.json").read_text())
    rep_b = json.loads(
        (tmp_path / "b" / "mini_separating" / "report.json").read_text())
    assert rep_a["config_hash"] != rep_b["config_hash"]
    assert rep_b["seed"] == 9


def test_malformed_config_exits_3(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"name": "x",\n  "kind": oops}\n')
    assert main(["run-scenario", "--config", str(path)]) == 3
    err = capsys.readouterr().err
    assert "broken.json:2" in err        # line-anchored message


def test_invalid_config_field_exits_3(tmp_path, capsys):
    bad = dict(SMALL_SEPARATING, name="bad")
    bad["grid"] = {"n": 12, "length": 64.0}
    assert main(["run-scenario", "--config", write_config(tmp_path, bad)]) == 3
    assert "config.grid.n" in capsys.readouterr().err


def test_unknown_suite_exits_3(capsys):
    assert main(["run-suite", "nonsense"]) == 3
    assert "unknown suite" in capsys.readouterr().err


def test_zero_count_exits_3(tmp_path, capsys):
    assert main(["run-suite", "inequalities", "--count", "0"]) == 3


def test_run_suite_writes_report(tmp_path, capsys):
    code = main(["run-suite", "inequalities", "--dims", "2,4", "--count",
                 "200", "--seed", "5", "--out-dir", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "suite_inequalities.json").read_text())
    assert report["passed"]
    assert report["config"]["dims"] == [2, 4]


def test_suite_determinism_byte_identical(tmp_path):
    for sub in ("r1", "r2"):
        main(["run-suite", "equal-time-reduction", "--dims", "4", "--count",
              "100", "--seed", "13", "--out-dir", str(tmp_path / sub)])
    a = (tmp_path / "r1" / "suite_equal-time-reduction.json").read_bytes()
    b = (tmp_path / "r2" / "suite_equal-time-reduction.json").read_bytes()
    assert a == b


def test_scenario_determinism_byte_identical(tmp_path):
    cfg = write_config(tmp_path, SMALL_SEPARATING)
    for sub in ("r1", "r2"):
        main(["run-scenario", "--config", cfg, "--out-dir",
              str(tmp_path / sub)])
    base = Path(tmp_path)
    csv_a = (base / "r1" / "mini_separating" / "series.csv").read_bytes()
    csv_b = (base / "r2" / "mini_separating" / "series.csv").read_bytes()
    assert csv_a == csv_b
    rep_a = json.loads((base / "r1" / "mini_separating" / "report.json").read_text())
    rep_b = json.loads((base / "r2" / "mini_separating" / "report.json").read_text())
    rep_a.pop("generated_at")
    rep_b.pop("generated_at")
    assert rep_a == rep_b


def test_replay_cli_roundtrip(tmp_path, capsys):
    batch = make_batch(4, CHUNK, 19, 0)
    lhs, rhs, valid = eval_inequalities(batch)["ine1"]
    cert = {
        "suite": "inequalities", "check": "ine1", "dim": 4, "seed": 19,
        "chunk": 0, "index": 7, "observed": float(lhs[7]),
        "bound": float(rhs[7]),
    }
    path = tmp_path / "cert.json"
    path.write_text(json.dumps(cert))
    assert main(["replay", "--certificate", str(path)]) == 0
    assert "MATCH" in capsys.readouterr().out
    cert["observed"] += 1e-9
    path.write_text(json.dumps(cert))
    assert main(["replay", "--certificate", str(path)]) == 2
