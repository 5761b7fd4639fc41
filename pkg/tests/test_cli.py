"""Command-line interface: configs, exit codes, outputs."""

import csv
import json

import numpy as np
import pytest
import yaml

from qoesim.cli import (
    EXIT_INVALID,
    EXIT_OK,
    config_from_dict,
    main,
    scenario_points,
)
from qoesim.metrics import CaseIIConstraints
from qoesim.ratequality import SyntheticSource, TraceFileSource, write_trace_csv


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


class TestConfigFromDict:
    def test_full_mapping(self):
        cfg = config_from_dict({
            "gamma": 9.0, "policy": "queue-case2", "admission_mode": "fixed",
            "theta": [10.0, 20.0], "stop_arrivals": 100, "seed": 4,
            "constraints": {"case": 2, "gs": [40.0, 60.0], "hs": [1.0, 1.0]},
            "type_probs": [0.5, 0.5],
        })
        assert isinstance(cfg.constraints, CaseIIConstraints)
        assert cfg.theta == (10.0, 20.0) and cfg.type_probs == (0.5, 0.5)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            config_from_dict({"gama": 6.0})

    def test_trace_source(self, tmp_path):
        path = tmp_path / "trace.csv"
        write_trace_csv(path, [(0, 0, 10.0, -20.0), (0, 1, 11.0, -21.0)])
        cfg = config_from_dict({"rq_source": {"trace": str(path)}})
        assert isinstance(cfg.rq_source, TraceFileSource)

    def test_synthetic_ranges(self):
        cfg = config_from_dict({"rq_source": {"q_lo_range": [30, 50],
                                              "q_hi_range": [70, 90]}})
        assert isinstance(cfg.rq_source, SyntheticSource)

    def test_defaults(self):
        cfg = config_from_dict({})
        assert cfg.gamma == 6.0 and cfg.policy == "queue-case1"


class TestScenarioPoints:
    def test_policy_compare_grid_shape(self):
        pts = scenario_points("policy-compare", [1, 2], {"stop_arrivals": 10})
        assert len(pts) == 3 * 2 * 2  # gammas x policies x seeds
        ids = [rid for rid, _ in pts]
        assert len(set(ids)) == len(ids)

    def test_admission_compare_covers_gamma_range(self):
        pts = scenario_points("admission-compare", [1], {"stop_arrivals": 10})
        gammas = {cfg.gamma for _, cfg in pts}
        assert gammas == set(float(g) for g in range(6, 17))
        assert len(pts) == 11 * 3

    def test_two_type_grid_vector_thresholds(self):
        pts = scenario_points("two-type-theta-grid", [1], {"stop_arrivals": 10})
        assert len(pts) == 16
        assert all(cfg.admission_mode == "fixed" and len(cfg.theta) == 2
                   for _, cfg in pts)

    def test_unknown_scenario(self):
        with pytest.raises(ValueError):
            scenario_points("no-such-experiment", [1], {})

    def test_empty_seeds(self):
        with pytest.raises(ValueError):
            scenario_points("policy-compare", [], {})


class TestValidateCommand:
    def test_valid_config_exits_zero(self, tmp_path, capsys):
        path = write_yaml(tmp_path / "ok.yaml", {"gamma": 9.0, "stop_arrivals": 5})
        assert main(["validate", "--config", path]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "ok"

    def test_invalid_config_exits_two(self, tmp_path):
        path = write_yaml(tmp_path / "bad.yaml", {"gamma": -1.0})
        assert main(["validate", "--config", path]) == EXIT_INVALID

    def test_unknown_key_exits_two(self, tmp_path):
        path = write_yaml(tmp_path / "bad.yaml", {"not_a_field": 1})
        assert main(["validate", "--config", path]) == EXIT_INVALID


class TestRunCommand:
    def test_writes_reports_and_prints_aggregates(self, tmp_path, capsys):
        path = write_yaml(tmp_path / "cfg.yaml",
                          {"gamma": 9.0, "stop_arrivals": 15, "seed": 2})
        out = tmp_path / "out"
        code = main(["run", "--config", path, "--out", str(out),
                     "--run-id", "demo"])
        assert code == EXIT_OK
        assert (out / "demo_users.csv").exists()
        assert (out / "aggregate.csv").exists()
        assert "satisfied_frac" in capsys.readouterr().out

    def test_flag_overrides(self, tmp_path):
        out = tmp_path / "out"
        code = main(["run", "--gamma", "9", "--arrivals", "10", "--seed", "1",
                     "--policy", "avg-quality", "--out", str(out)])
        assert code == EXIT_OK
        with open(out / "aggregate.csv", newline="") as fh:
            (row,) = csv.DictReader(fh)
        assert row["gamma"] == "9.0" and row["policy"] == "avg-quality"
        assert row["n_users"] == "10"

    def test_bad_override_exits_two(self, tmp_path):
        assert main(["run", "--gamma", "-3", "--out", str(tmp_path)]) == EXIT_INVALID


class TestSweepCommand:
    def test_custom_requires_config(self, tmp_path):
        code = main(["sweep", "--scenario", "custom", "--out", str(tmp_path)])
        assert code == EXIT_INVALID

    def test_custom_sweep_outputs(self, tmp_path):
        path = write_yaml(tmp_path / "cfg.yaml",
                          {"gamma": 9.0, "stop_arrivals": 10})
        out = tmp_path / "out"
        code = main(["sweep", "--scenario", "custom", "--config", path,
                     "--seeds", "1", "2", "--out", str(out)])
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert [r["status"] for r in manifest["runs"]] == ["ok", "ok"]
        with open(out / "aggregate.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert {r["seed"] for r in rows} == {"1", "2"}

    def test_failed_point_recorded_not_fatal(self, tmp_path, monkeypatch, capsys):
        import qoesim.cli as cli_mod

        calls = {"n": 0}

        def flaky(config):
            calls["n"] += 1
            if calls["n"] == 1:
                raise RuntimeError("boom")
            return real_run(config)

        real_run = cli_mod.run
        monkeypatch.setattr(cli_mod, "run", flaky)
        path = write_yaml(tmp_path / "cfg.yaml",
                          {"gamma": 9.0, "stop_arrivals": 5})
        out = tmp_path / "out"
        code = main(["sweep", "--scenario", "custom", "--config", path,
                     "--seeds", "1", "2", "--out", str(out)])
        assert code == 3  # partial
        manifest = json.loads((out / "manifest.json").read_text())
        statuses = [r["status"] for r in manifest["runs"]]
        assert statuses == ["failed", "ok"]
        assert "boom" in manifest["runs"][0]["error"]


class TestOracleCommand:
    def test_small_suite_passes(self, capsys):
        code = main(["oracle", "--instances", "10", "--levels", "120"])
        assert code == EXIT_OK
        assert "max relative gap" in capsys.readouterr().out
