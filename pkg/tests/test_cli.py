"""Tests for the command-line verbs and their exit codes."""

import json
import os

import numpy as np
import pytest

from ContainPy.cli import apply_overrides, read_gains, run_cli
from ContainPy.core.errors import ScenarioError
from ContainPy.harness.builtin import get_builtin_scenario


def test_list_scenarios(capsys):
    assert run_cli(["list-scenarios"]) == 0
    assert "discrete-pin-example" in capsys.readouterr().out


def test_unknown_flag_exits():
    with pytest.raises(SystemExit):
        run_cli(["run", "discrete-pin-example", "--bogus"])


class TestVerbs:
    def test_verify(self):
        assert run_cli(["verify", "discrete-pin-example"]) == 0

    def test_synth_writes_audit(self, tmp_path):
        assert run_cli(["synth", "discrete-pin-example", "-o", str(tmp_path)]) == 0
        with open(tmp_path / "discrete-pin-example_synthesis.json") as f:
            data = json.load(f)
        assert len(data["applied_gains"]) == 4
        assert data["stability_margin"] > 0

    def test_run_writes_outputs(self, tmp_path):
        assert run_cli(["run", "discrete-pin-example", "-o", str(tmp_path)]) == 0
        assert os.path.isfile(tmp_path / "discrete-pin-example_trace.csv")
        assert os.path.isfile(tmp_path / "discrete-pin-example_report.json")

    def test_failed_check_exit_code(self):
        assert run_cli(["run", "discrete-disturbance-sharpness"]) == 1

    def test_sweep(self, tmp_path):
        code = run_cli(["sweep", "discrete-disturbance-rejection", "--runs", "2", "-o", str(tmp_path)])
        assert code == 0
        assert os.path.isfile(tmp_path / "discrete-disturbance-rejection_sweep.json")

    def test_unknown_scenario(self):
        assert run_cli(["verify", "no-such-scenario"]) == 1

    def test_unreachable_scenario_file(self, tmp_path):
        data = {
            "name": "cut",
            "controller": "discrete-PIn",
            "topology": {"leaders": 2, "followers": 2, "edges": [[1, 3, 1], [2, 3, 1]]},
            "leaders": [{"coeffs": [[0.0, 0.0]]}, {"coeffs": [[1.0, 0.0]]}],
            "follower_order": 1,
            "trajectory_order": 0,
            "initial_states": [[[0.0, 1.0]], [[0.0, 2.0]]],
        }
        path = tmp_path / "cut.json"
        path.write_text(json.dumps(data))
        assert run_cli(["verify", str(path)]) == 1


class TestGainFiles:
    def test_list_file(self, tmp_path):
        path = tmp_path / "gains.json"
        path.write_text(json.dumps([1.0, 2.0]))
        np.testing.assert_array_equal(read_gains(str(path)), [1.0, 2.0])

    def test_object_file(self, tmp_path):
        path = tmp_path / "gains.json"
        path.write_text(json.dumps({"K": [1.0, 2.0, 3.0]}))
        assert read_gains(str(path)).shape == (3,)

    def test_non_finite_gain(self, tmp_path):
        path = tmp_path / "gains.json"
        path.write_text("[1.0, NaN]")
        with pytest.raises(ScenarioError, match="non-finite"):
            read_gains(str(path))

    def test_synthesized_keyword(self):
        assert read_gains("synthesized") == "synthesized"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="not found"):
            read_gains(str(tmp_path / "absent.json"))
        assert run_cli(["run", "discrete-pin-example", "--gains", str(tmp_path / "absent.json")]) == 1

    def test_wrong_length_exit_code(self, tmp_path):
        path = tmp_path / "gains.json"
        path.write_text(json.dumps([1.0, 2.0]))
        assert run_cli(["run", "discrete-pin-example", "--gains", str(path)]) == 1


class TestOverrides:
    def test_seed_moves_noise_seed(self):
        scenario = apply_overrides(get_builtin_scenario("discrete-noisy-example"), seed=99)
        assert scenario.seed == 99
        assert scenario.noise.seed == 99

    def test_no_changes_returns_same_scenario(self):
        scenario = get_builtin_scenario("discrete-pin-example")
        assert apply_overrides(scenario) is scenario

    def test_horizon_and_runs(self):
        scenario = apply_overrides(get_builtin_scenario("discrete-noisy-example"), horizon=50, runs=10)
        assert scenario.horizon == 50
        assert scenario.num_runs == 10
