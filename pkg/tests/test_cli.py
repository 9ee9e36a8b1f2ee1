"""CLI verbs and exit codes."""

import pytest

from ofwdyn.cli import main

CONFIG = """
experiment: {name: cli, seed: 5, T_values: [30]}
set: {kind: euclidean-ball, dimension: 2, center: [0.0, 0.0], radius: 1.0}
stream:
  family: drifting-quadratic
  alpha: 1.0
  schedule: {kind: random-walk, magnitude: 0.05}
learners:
  - {id: ls, kind: ofw-linesearch, theorems: [thm2], lemmas: [lemma4]}
output: {csv: OUT_CSV, json: OUT_JSON}
"""


@pytest.fixture
def config_path(tmp_path):
    csv_path = tmp_path / "rows.csv"
    json_path = tmp_path / "rows.json"
    text = CONFIG.replace("OUT_CSV", str(csv_path)).replace("OUT_JSON", str(json_path))
    path = tmp_path / "config.yaml"
    path.write_text(text)
    return path, csv_path, json_path


def test_run_writes_outputs(config_path, capsys):
    path, csv_path, json_path = config_path
    assert main(["run", str(path)]) == 0
    assert csv_path.exists() and json_path.exists()
    assert csv_path.read_text().startswith("scenario,learner,T,seed,regret")


def test_run_identical_bytes_across_invocations(config_path):
    path, csv_path, _ = config_path
    assert main(["run", str(path)]) == 0
    first = csv_path.read_bytes()
    assert main(["run", str(path), "--parallel", "4"]) == 0
    assert csv_path.read_bytes() == first


def test_sweep_overrides_horizons(config_path):
    path, csv_path, _ = config_path
    assert main(["sweep", str(path), "--T", "10", "20", "40"]) == 0
    lines = csv_path.read_text().strip().split("\n")
    assert len(lines) == 4  # header + 3 rows


def test_csv_path_override(config_path, tmp_path):
    path, csv_path, _ = config_path
    override = tmp_path / "elsewhere.csv"
    assert main(["run", str(path), "--csv", str(override)]) == 0
    assert override.exists()
    assert not csv_path.exists()  # the override replaces the configured path
    assert override.read_text().startswith("scenario,learner")


def test_verify_ok(config_path, capsys):
    path, _, _ = config_path
    assert main(["verify", str(path)]) == 0
    assert "OK all certificates hold" in capsys.readouterr().out


def test_verify_certificate_failure(tmp_path, capsys):
    text = CONFIG.replace("output: {csv: OUT_CSV, json: OUT_JSON}", "")
    text += "\ntolerances: {lemma_slack: -1.0e9}\n"
    path = tmp_path / "strict.yaml"
    path.write_text(text)
    assert main(["verify", str(path)]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    missing = tmp_path / "nope.yaml"
    assert main(["run", str(missing)]) == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("experiment: {name: x}\n")
    assert main(["run", str(bad)]) == 1
    assert "config error" in capsys.readouterr().err


def test_runtime_error_exit_code(tmp_path, capsys):
    text = """
experiment: {name: rt, seed: 1, T_values: [5]}
set: {kind: box, lower: [-1.0, -1.0], upper: [1.0, 1.0]}
stream:
  family: rank1-quadratic
  alpha: 1.0
  direction: [1.0, 0.3]
  base_target: 0.7
  schedule: {kind: static}
learners:
  - {id: greedy, kind: greedy}
tolerances: {minimizer_gap: 1.0e-13, minimizer_max_iter: 2}
"""
    path = tmp_path / "rt.yaml"
    path.write_text(text)
    assert main(["run", str(path)]) == 3
    assert "unit failed" in capsys.readouterr().err


def test_selftest_passes(capsys):
    assert main(["selftest", "--samples", "300", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "smoothness" in out and "FAIL" not in out
