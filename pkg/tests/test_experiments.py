import json

import pytest

from nodelab.cli import main
from nodelab.experiments import ExperimentConfig, list_experiments, run_experiment


FAST_OVERRIDES = {
    "E1": {"periods": 0.5, "record_every": 200},
    "E2": {"trials": 10},
    "E4": {"n_paths": 4000, "n_steps": 300, "record_every": 150},
}


def run(exp, out, **params):
    merged = dict(FAST_OVERRIDES.get(exp, {}))
    merged.update(params)
    return run_experiment(ExperimentConfig(exp, merged, out))


class TestRegistry:
    def test_eight_entries_in_order(self):
        entries = list_experiments()
        assert [e["id"] for e in entries] == [f"E{i}" for i in range(1, 9)]

    def test_entries_carry_defaults_and_claims(self):
        for e in list_experiments():
            assert e["defaults"]
            assert "seed" in e["defaults"]
            assert e["claim"]
            assert e["description"]

    def test_unknown_experiment_rejected(self, tmp_path):
        with pytest.raises(KeyError, match="registry"):
            run_experiment(ExperimentConfig("E99", {}, tmp_path))

    def test_unknown_parameter_rejected(self, tmp_path):
        with pytest.raises(KeyError, match="unknown parameter"):
            run_experiment(ExperimentConfig("E3", {"bogus": 1}, tmp_path))


class TestReports:
    def test_results_json_schema(self, tmp_path):
        report = run("E3", tmp_path / "e3")
        payload = json.loads((tmp_path / "e3" / "results.json").read_text())
        assert list(payload) == [
            "experiment", "resolved_params", "metrics", "verdict",
            "artifact_paths", "wall_time", "seed",
        ]
        assert payload["experiment"] == "E3"
        assert payload["metrics"] == report.metrics
        for name in payload["artifact_paths"]:
            assert (tmp_path / "e3" / name).exists()

    def test_node_fill_passes(self, tmp_path):
        report = run("E3", tmp_path / "e3")
        assert report.verdict["fill_matches_prediction_1pc"] == "pass"

    def test_charge_splitting_passes(self, tmp_path):
        report = run("E8", tmp_path / "e8")
        assert report.verdict["splits_into_unit_charges"] == "pass"

    def test_winding_stability_reduced(self, tmp_path):
        report = run("E2", tmp_path / "e2")
        assert report.metrics["charge_preserved_fraction"] == 1.0
        assert (tmp_path / "e2" / "trials.csv").exists()

    def test_determinism_bit_exact(self, tmp_path):
        run("E3", tmp_path / "a")
        run("E3", tmp_path / "b")
        ja = json.loads((tmp_path / "a" / "results.json").read_text())
        jb = json.loads((tmp_path / "b" / "results.json").read_text())
        assert json.dumps(ja["metrics"]) == json.dumps(jb["metrics"])
        assert (tmp_path / "a" / "node_fill.csv").read_bytes() == (tmp_path / "b" / "node_fill.csv").read_bytes()

    def test_determinism_with_random_trials(self, tmp_path):
        run("E2", tmp_path / "a", trials=6)
        run("E2", tmp_path / "b", trials=6)
        assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()
        ja = json.loads((tmp_path / "a" / "results.json").read_text())
        jb = json.loads((tmp_path / "b" / "results.json").read_text())
        assert json.dumps(ja["metrics"]) == json.dumps(jb["metrics"])

    def test_numerical_failure_reported(self, tmp_path):
        # a loop far outside the vortex density runs through masked points
        report = run("E2", tmp_path / "bad", loop_radius=5.9)
        assert report.verdict == {"completed": "fail"}
        assert "error_message" in report.resolved_params


class TestCli:
    def test_list(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert out.count("E") >= 8

    def test_list_json(self, capsys):
        assert main(["list", "--json"]) == 0
        entries = json.loads(capsys.readouterr().out)
        assert len(entries) == 8

    def test_run_with_set_overrides(self, tmp_path, capsys):
        code = main(["run", "E3", "--out", str(tmp_path / "r"), "--set", "points=96"])
        assert code == 0
        payload = json.loads((tmp_path / "r" / "results.json").read_text())
        assert payload["resolved_params"]["points"] == 96

    def test_run_with_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"params": {"epsilon": 0.04}}))
        code = main(["run", "E8", "--config", str(cfg), "--out", str(tmp_path / "r"),
                     "--seed", "77"])
        assert code == 0
        payload = json.loads((tmp_path / "r" / "results.json").read_text())
        assert payload["resolved_params"]["epsilon"] == 0.04
        assert payload["seed"] == 77

    def test_unknown_experiment_usage_error(self, tmp_path):
        assert main(["run", "E99", "--out", str(tmp_path)]) == 3

    def test_bad_set_usage_error(self, tmp_path):
        assert main(["run", "E3", "--set", "nonsense", "--out", str(tmp_path)]) == 3

    def test_failing_verdict_exit_code(self, tmp_path):
        code = main(["run", "E2", "--out", str(tmp_path / "r"),
                     "--set", "trials=4", "--set", "loop_radius=5.9"])
        assert code == 2
