"""
Tests for scenario loading, the command-line entry point and run artifacts
"""
import json
import os
import re
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from agents.orchestrator import compare_async, run, strategy_variants
from app import EXIT_CONFIG, EXIT_DIAGNOSTIC, EXIT_OK, main, resolve_output_dir
from modules.data_loader import load_json_data, load_scenario_file, parse_scenario
from modules.reporting import format_comparison_table, read_trajectory_csv, write_trajectory_csv
from shared.errors import ConfigError
from shared.schema import TriggerStrategy

BENCHMARK = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "benchmark.json")


def write_variant(tmp_path, name="scenario.json", **sections):
    """Benchmark document with some section keys replaced"""
    data = load_json_data(BENCHMARK)
    for section, values in sections.items():
        data[section].update(values)
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


# ============================================================================
# Scenario loading
# ============================================================================

def test_benchmark_preset_values():
    scenario = parse_scenario(BENCHMARK)
    assert scenario.trigger.pi == 2.5
    assert scenario.trigger.pi_bar == 4.0
    assert scenario.trigger.mu == 5.4
    assert scenario.trigger.delta == 0.245
    assert scenario.n_followers == 4 and scenario.order == 2
    np.testing.assert_array_equal(scenario.observer_gains.q, [350.0, 0.5])
    np.testing.assert_array_equal(scenario.controller_gains.m, [0.005])
    assert scenario.controller_gains.lam == 120.0
    assert scenario.n_steps == 5000


def test_trigger_side_condition_is_cited(tmp_path):
    path = write_variant(tmp_path, trigger={"pi_bar": 2})
    with pytest.raises(ConfigError) as err:
        load_scenario_file(path)
    assert "π̄ > π" in str(err.value)
    assert err.value.field_path.startswith("trigger")


def test_unknown_strategy_lists_valid_names():
    with pytest.raises(ConfigError) as err:
        load_scenario_file(BENCHMARK, strategy="ripple")
    message = str(err.value)
    assert "ripple" in message
    for name in ("fixed", "relative", "switch", "periodic"):
        assert name in message
    assert err.value.field_path == "trigger.strategy"


def test_unknown_keys_are_rejected(tmp_path):
    path = write_variant(tmp_path, sim={"horizn": 3.0})
    with pytest.raises(ConfigError) as err:
        load_scenario_file(path)
    assert "sim" in err.value.field_path


def test_missing_or_malformed_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario_file(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_scenario_file(broken)


def test_output_directory_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("ETC_OUTPUT_DIR", str(tmp_path / "from_env"))
    doc = load_scenario_file(BENCHMARK)
    assert resolve_output_dir(doc, None) == tmp_path / "from_env"
    assert resolve_output_dir(doc, str(tmp_path / "flag")) == tmp_path / "flag"
    doc = load_scenario_file(write_variant(tmp_path, output={"directory": str(tmp_path / "file")}))
    assert resolve_output_dir(doc, None) == tmp_path / "file"


# ============================================================================
# Command line
# ============================================================================

def test_invalid_path_exits_with_config_status(tmp_path):
    assert main(["run", "--scenario", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["run", "--scenario", BENCHMARK, "--strategy", "ripple"]) == EXIT_CONFIG


def test_diagnose_benchmark_passes(capsys):
    assert main(["diagnose", "--scenario", BENCHMARK]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[pass] P Hurwitz" in out
    assert "[pass] π̄* > π*/(1−Δ)" in out
    assert "[FAIL]" not in out


def test_diagnose_reports_non_hurwitz_observer(tmp_path, capsys):
    path = write_variant(tmp_path, observer={"q": [-1, 1]})
    assert main(["diagnose", "--scenario", path]) == EXIT_DIAGNOSTIC
    assert "[FAIL] P Hurwitz" in capsys.readouterr().out


def test_run_writes_artifacts(tmp_path):
    code = main(["run", "--scenario", BENCHMARK, "--strategy", "fixed",
                 "--horizon", "0.05", "--out", str(tmp_path)])
    assert code == EXIT_OK
    for name in ("trajectory.csv", "events.csv", "metrics.txt", "metrics.json",
                 "outputs_vs_reference.svg", "consensus_errors.svg"):
        assert (tmp_path / name).is_file()
    stems = sorted(p.name for p in tmp_path.glob("intervals_agent_*.svg"))
    assert stems == [f"intervals_agent_{i}.svg" for i in range(1, 5)]

    frame = pd.read_csv(tmp_path / "trajectory.csv")
    assert len(frame) == 51
    for column in ("time", "x_1_1", "xhat_4_2", "varpihat_2_1", "z_3_2", "u_1", "w_2", "theta_3", "wnorm_4_2"):
        assert column in frame.columns
    metrics = json.loads((tmp_path / "metrics.json").read_text(encoding="utf-8"))
    assert metrics["strategy"] == "fixed"
    assert len(metrics["agents"]) == 4


def test_periodic_events_file(tmp_path):
    code = main(["run", "--scenario", BENCHMARK, "--strategy", "periodic",
                 "--horizon", "0.05", "--out", str(tmp_path)])
    assert code == EXIT_OK
    events = pd.read_csv(tmp_path / "events.csv")
    assert list(events.columns) == ["time", "agent", "branch", "u"]
    for agent in range(1, 5):
        rows = events[events["agent"] == agent]
        assert (rows["branch"] == "init").sum() == 1
        assert (rows["branch"] == "periodic").sum() == 50


def test_trajectory_csv_round_trip(tmp_path):
    log, _ = run(parse_scenario(BENCHMARK, horizon=0.02))
    path = write_trajectory_csv(log, tmp_path / "trajectory.csv")
    frame = read_trajectory_csv(path)
    assert list(frame.columns) == log.column_names()
    np.testing.assert_array_equal(frame.to_numpy(), log.to_frame().to_numpy())


# ============================================================================
# Comparison
# ============================================================================

@pytest.mark.asyncio
async def test_compare_all_strategies():
    base = parse_scenario(BENCHMARK, horizon=0.05)
    report = await compare_async(strategy_variants(base), max_workers=2)
    assert report.strategies == [s.value for s in TriggerStrategy]
    assert not report.errors
    assert [row.agent for row in report.rows] == [1, 2, 3, 4]
    for row in report.rows:
        assert row.updates["switch"] == row.switch_relative + row.switch_fixed
        assert row.ordering_ok is not None
    assert report.periodic_updates == [50, 50, 50, 50]

    table = format_comparison_table(report)
    header = table.splitlines()[0]
    assert header.split() == ["follower", "fixed", "switch", "relative", "rel<=sw<=fix"]
    assert len(re.findall(r"\b\d+\(\d+\+\d+\)", table)) == 4
    assert "periodic baseline: 50, 50, 50, 50" in table


def test_compare_command_writes_table(tmp_path, capsys):
    code = main(["compare", "--scenario", BENCHMARK, "--horizon", "0.02", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "comparison.txt").is_file()
    saved = json.loads((tmp_path / "comparison.json").read_text(encoding="utf-8"))
    assert len(saved["rows"]) == 4
    assert "rel<=sw<=fix" in capsys.readouterr().out
