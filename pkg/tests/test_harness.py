"""Config parsing, the experiment runner, slope fitting, result emission."""

import json
import warnings

import numpy as np
import pytest

from ofwdyn import harness
from ofwdyn.exceptions import ConfigError
from ofwdyn.harness import (
    CSV_COLUMNS,
    ResultRow,
    emit_results,
    fit_slope,
    parse_config,
    parse_csv,
    rows_to_csv,
    rows_to_json,
    run_experiment,
    verify_experiment,
)

MINIMAL = """
experiment: {name: mini, seed: 1, T_values: [50]}
set: {kind: euclidean-ball, dimension: 2, center: [0.0, 0.0], radius: 1.0}
stream:
  family: drifting-quadratic
  alpha: 1.0
  schedule: {kind: static}
learners:
  - {id: ls, kind: ofw-linesearch, theorems: [thm2], lemmas: [lemma4]}
"""


def test_parse_minimal_config():
    config = parse_config(MINIMAL)
    assert config.name == "mini"
    assert config.T_values == (50,)
    assert config.learners[0].theorems == ("thm2",)
    assert config.schedule.seed == 1  # inherits the experiment seed


def test_parse_rejects_unknown_keys_with_path():
    bad = MINIMAL + "\nextra_section: {}\n"
    with pytest.raises(ConfigError, match="config.extra_section"):
        parse_config(bad)
    bad2 = MINIMAL.replace("schedule: {kind: static}", "schedule: {kind: static, warp: 2}")
    with pytest.raises(ConfigError, match="stream.schedule.warp"):
        parse_config(bad2)


def test_parse_rejects_duplicate_learner_ids():
    dup = MINIMAL.replace(
        "learners:\n  - {id: ls, kind: ofw-linesearch, theorems: [thm2], lemmas: [lemma4]}",
        "learners:\n  - {id: ls, kind: ofw-linesearch}\n  - {id: ls, kind: ogd}",
    )
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(dup)


def test_parse_rejects_thm3_on_box():
    text = """
experiment: {name: bad, seed: 1, T_values: [10]}
set: {kind: box, lower: [-1.0, -1.0], upper: [1.0, 1.0]}
stream:
  family: drifting-quadratic
  alpha: 1.0
  schedule: {kind: static}
learners:
  - {id: ls, kind: ofw-linesearch, theorems: [thm3]}
"""
    with pytest.raises(ConfigError, match="strongly convex set"):
        parse_config(text)


def test_parse_assumption_gates():
    no_interior = MINIMAL.replace("theorems: [thm2]", "theorems: [thm4]")
    with pytest.raises(ConfigError, match="interior"):
        parse_config(no_interior)
    wrong_learner = MINIMAL.replace("theorems: [thm2]", "theorems: [thm1]")
    with pytest.raises(ConfigError, match="thm1"):
        parse_config(wrong_learner)
    with pytest.raises(ConfigError, match="missing required key"):
        parse_config("experiment: {name: x, seed: 1}\n")
    bad_t = MINIMAL.replace("T_values: [50]", "T_values: []")
    with pytest.raises(ConfigError):
        parse_config(bad_t)


def test_parse_interior_radius_required():
    text = MINIMAL.replace("alpha: 1.0", "alpha: 1.0\n  interior: true")
    with pytest.raises(ConfigError, match="interior_radius"):
        parse_config(text)


def test_run_experiment_rows_and_bounds():
    config = parse_config(MINIMAL.replace("T_values: [50]", "T_values: [20, 50]"))
    rows, reports = harness.run_experiment_detailed(config)
    assert len(rows) == 2
    assert [r.T for r in rows] == [20, 50]
    for row in rows:
        assert row.lemma_failures == ""
        assert row.regret <= row.bound_thm2 + 1e-6
        report = reports[(row.learner, row.T)]
        assert report.lemma_verdicts["lemma4"].passed


def test_run_experiment_deterministic_and_parallel_safe():
    config = parse_config(MINIMAL.replace("T_values: [50]", "T_values: [20, 40, 60]"))
    rows1 = run_experiment(config, parallel=1)
    rows8 = run_experiment(config, parallel=8)
    assert rows_to_csv(rows1) == rows_to_csv(rows8)
    rows1b = run_experiment(config, parallel=1)
    assert rows_to_csv(rows1) == rows_to_csv(rows1b)


def test_failed_unit_keeps_other_rows():
    text = """
experiment: {name: failing, seed: 1, T_values: [10]}
set: {kind: box, lower: [-1.0, -1.0], upper: [1.0, 1.0]}
stream:
  family: rank1-quadratic
  alpha: 1.0
  direction: [1.0, -0.5]
  base_target: 0.2
  schedule: {kind: static}
learners:
  - {id: greedy, kind: greedy}
  - {id: ls, kind: ofw-linesearch}
tolerances: {minimizer_gap: 1.0e-13, minimizer_max_iter: 3}
"""
    rows = run_experiment(parse_config(text))
    by_id = {r.learner: r for r in rows}
    assert by_id["ls"].lemma_failures.startswith("error:")
    assert by_id["ls"].regret is None
    assert by_id["greedy"].lemma_failures.startswith("error:")


def test_verify_experiment_clean(tmp_path):
    config = parse_config(MINIMAL)
    rows, failures = verify_experiment(config)
    assert failures == []


def test_verify_reports_failures():
    strict = MINIMAL + "\ntolerances: {lemma_slack: -1.0e9}\n"
    rows, failures = verify_experiment(parse_config(strict))
    assert failures and "lemma4" in failures[0]


def test_sweep_monotone_regret_under_thm4():
    text = """
experiment: {name: plateau, seed: 2, T_values: [10, 100, 1000]}
set: {kind: euclidean-ball, dimension: 2, center: [0.0, 0.0], radius: 1.0}
stream:
  family: drifting-quadratic
  alpha: 1.0
  base_center: [0.1, 0.0]
  interior: true
  interior_radius: 0.8
  schedule: {kind: static}
learners:
  - {id: ls, kind: ofw-linesearch, theorems: [thm4]}
"""
    rows = run_experiment(parse_config(text))
    regrets = [r.regret for r in rows]
    assert regrets == sorted(regrets)
    for row in rows:
        assert row.regret <= row.bound_thm4 + 1e-6


def test_fit_slope_recovers_planted_exponents():
    ts = np.array([10.0, 100.0, 1000.0, 10000.0])
    for planted in (1.0, 0.5, 0.0):
        points = [(t, 3.7 * t**planted) for t in ts]
        exponent, r2 = fit_slope(points)
        assert exponent == pytest.approx(planted, abs=1e-9)
        assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_slope_contracts():
    with pytest.raises(ConfigError):
        fit_slope([(10, 1.0), (100, 2.0)])
    with pytest.raises(ConfigError):
        fit_slope([(10, 1.0), (20, 2.0), (40, 3.0)])  # under two decades
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        exponent, _ = fit_slope(
            [(10, 1.0), (100, 1.0), (1000, 1.0), (10000, -1.0)]
        )
    assert any("nonpositive" in str(w.message) for w in caught)
    assert exponent == pytest.approx(0.0, abs=1e-9)


def test_emit_results_csv_and_json(tmp_path):
    header_only = rows_to_csv([])
    assert header_only == ",".join(CSV_COLUMNS) + "\n"
    row = ResultRow(
        scenario="s", learner="l", T=10, seed=1, regret=0.125, V_T=0.0, D_T=1e-17,
        P_T_star=0.5, S_T_star=0.25, M=2.0, G=2.0, bound_thm2=40.0,
    )
    csv_path = tmp_path / "out.csv"
    json_path = tmp_path / "out.json"
    emit_results([row], "csv", str(csv_path))
    emit_results([row], "json", str(json_path))
    text = csv_path.read_text()
    assert text.endswith("\n")
    parsed = parse_csv(text)
    assert parsed[0] == row
    payload = json.loads(json_path.read_text())
    assert payload[0]["regret"] == 0.125
    assert payload[0]["bound_thm1"] is None
    assert [*payload[0].keys()] == CSV_COLUMNS
    with pytest.raises(ConfigError):
        emit_results([row], "xml", str(tmp_path / "out.xml"))


def test_csv_header_is_the_documented_contract():
    assert CSV_COLUMNS == [
        "scenario", "learner", "T", "seed", "regret", "V_T", "D_T", "P_T_star",
        "S_T_star", "M", "G", "bound_thm1", "bound_thm2", "bound_thm3",
        "bound_thm4", "bound_thm5", "bound_thm8", "lemma_failures", "wall_ms",
    ]


def test_shipped_configs_parse_and_verify_quickly():
    for name in ("certificates_ball", "certificates_interior", "rank1_box"):
        config = harness.load_config(f"configs/{name}.yaml")
        small = harness.ExperimentConfig(**{**config.__dict__, "T_values": (50,)})
        rows, failures = verify_experiment(small, parallel=2)
        assert failures == [], (name, failures)
