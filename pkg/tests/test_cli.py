"""
Tests for the command-line entry point
"""
import argparse
import json
import math
import os

import pytest

from main import EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, build_parser, main
from tests.conftest import TestConfig


def _run(capsys, *argv):
    code = main(list(argv))
    response = json.loads(capsys.readouterr().out)
    assert response["exit_code"] == code
    return code, response


@pytest.fixture
def enumerated_run(tmp_path, capsys):
    out = str(tmp_path / "enum")
    code, response = _run(
        capsys, "enumerate", "--config", TestConfig.DESK_CONFIG, "--fixed-model", "--out", out,
    )
    assert code == EXIT_OK, response
    return out, response


class TestEvaluate:

    def test_clip_on_reference_hardware(self, capsys):
        code, response = _run(capsys, "evaluate", "--preset", "clip-b-16")
        assert code == EXIT_OK, response["error"]
        data = response["data"]
        assert data["hw"] == TestConfig.CLIP_B16_MIN_CARBON_HW
        # the carbon mode default cap is 50 ms
        assert data["perf"]["latency_s"] <= 0.05
        assert data["params"] == 149_620_736
        assert 0.05 <= data["carbon"]["total_kg"] <= 5.0
        assert sum(data["bound_counts"].values()) > 0
        assert response["meta"]["command"] == "evaluate"

    def test_latency_cap_violation_exits_infeasible(self, capsys):
        code, response = _run(capsys, "evaluate", "--preset", "clip-b-16", "--latency-cap", "1e-6")
        assert code == EXIT_INFEASIBLE
        assert not response["success"]
        assert "LATENCY_CAP" in response["error"]
        # the cost report is still printed
        assert response["data"]["carbon"]["total_kg"] > 0

    def test_bad_hardware_notation(self, capsys):
        code, response = _run(capsys, "evaluate", "--preset", "clip-b-16", "--hw", "1,2,3")
        assert code == EXIT_USAGE
        assert "--hw" in response["error"]

    def test_unknown_region(self, capsys):
        code, response = _run(capsys, "evaluate", "--preset", "clip-b-16", "--region", "ATLANTIS")
        assert code == EXIT_USAGE
        assert "CA-US" in response["error"]

    def test_dump_ops(self, capsys, tmp_path):
        path = tmp_path / "ops.csv"
        code, _ = _run(
            capsys, "evaluate", "--preset", "clip-b-16", "--dump-ops", str(path),
        )
        assert code == EXIT_OK
        assert path.exists()


class TestSearch:

    def test_enumerate_writes_run_directory(self, enumerated_run):
        out, response = enumerated_run
        data = response["data"]
        assert data["strategy"] == "exhaustive"
        assert data["evaluations"] == TestConfig.DESK_HARDWARE
        assert data["front_size"] > 0
        for name in ("config.json", "candidates.jsonl", "pareto.csv", "run.json"):
            assert os.path.exists(os.path.join(out, name))
        assert os.path.exists(os.path.join(out, "reports", "pareto_scatter.csv"))

    def test_refuses_non_empty_output(self, enumerated_run, capsys):
        out, _ = enumerated_run
        code, response = _run(capsys, "enumerate", "--config", TestConfig.DESK_CONFIG, "--fixed-model", "--out", out)
        assert code == EXIT_USAGE
        assert "--force" in response["error"]

        code, _ = _run(
            capsys, "enumerate", "--config", TestConfig.DESK_CONFIG, "--fixed-model", "--out", out, "--force",
        )
        assert code == EXIT_OK

    def test_search_against_oracle(self, enumerated_run, capsys, tmp_path):
        oracle, _ = enumerated_run
        code, response = _run(
            capsys, "search", "--config", TestConfig.DESK_CONFIG, "--fixed-model",
            "--budget", "32", "--population", "16", "--seed", "3",
            "--oracle", oracle, "--out", str(tmp_path / "nsga"),
        )
        assert code == EXIT_OK
        data = response["data"]
        assert data["seed"] == 3
        assert 0 < data["hv_ratio"] <= 1.0 + 1e-9

    def test_empty_front_exits_infeasible(self, capsys, tmp_path):
        code, response = _run(
            capsys, "enumerate", "--config", TestConfig.DESK_CONFIG, "--fixed-model",
            "--latency-cap", "1e-9", "--out", str(tmp_path / "none"),
        )
        assert code == EXIT_INFEASIBLE
        assert response["data"]["front_size"] == 0


class TestReports:

    def test_extremes(self, enumerated_run, capsys):
        out, _ = enumerated_run
        code, response = _run(capsys, "report", "extremes", "--run", out)
        assert code == EXIT_OK
        assert [row["kind"] for row in response["data"]["rows"]] == ["min_carbon", "min_latency"]
        assert os.path.exists(os.path.join(out, "reports", "extremes.csv"))

    def test_iso_reports_empty_cells(self, enumerated_run, capsys):
        out, _ = enumerated_run
        code, response = _run(capsys, "report", "iso", "--runs", out, "--targets", "0.5,0.99", "--tol", "0.001")
        assert code == EXIT_OK
        assert response["data"]["rows"] == 2
        assert response["data"]["empty_cells"] >= 1
        assert response["data"]["source"] == "front"

        code, response = _run(capsys, "report", "iso", "--runs", out, "--targets", "0.5,0.99", "--all")
        assert code == EXIT_OK
        assert response["data"]["source"] == "feasible"

    def test_breakdown_of_run(self, enumerated_run, capsys):
        out, enum_response = enumerated_run
        code, response = _run(capsys, "report", "breakdown", "--run", out)
        assert code == EXIT_OK
        assert response["data"]["rows"] == enum_response["data"]["front_size"]

    def test_consistency(self, capsys, tmp_path):
        runs = []
        for seed in (0, 1):
            out = str(tmp_path / f"seed{seed}")
            code, _ = _run(
                capsys, "search", "--config", TestConfig.DESK_CONFIG, "--fixed-model",
                "--budget", "32", "--population", "16", "--seed", str(seed), "--out", out,
            )
            assert code == EXIT_OK
            runs.append(out)
        code, response = _run(capsys, "report", "consistency", "--runs", ",".join(runs))
        assert code == EXIT_OK
        (row,) = response["data"]["modes"]
        assert row["runs"] == 2
        assert row["seeds"] == "0;1"

    def test_unknown_sweep_axis(self, capsys):
        code, _ = _run(capsys, "report", "sweep", "--axis", "voltage")
        assert code == EXIT_USAGE


class TestMetrics:

    def test_hv_matches_run_summary(self, enumerated_run, capsys):
        out, enum_response = enumerated_run
        code, response = _run(capsys, "hv", "--run", out)
        assert code == EXIT_OK
        assert response["data"]["hypervolume"] == pytest.approx(enum_response["data"]["hypervolume"])

    def test_hv_needs_a_run(self, capsys):
        code, _ = _run(capsys, "hv")
        assert code == EXIT_USAGE

    def test_spearman_ties(self, capsys):
        args = ("spearman", "--xs", "1,2,2,4", "--ys", "1,3,2,4")
        _, first = _run(capsys, *args, "--ties", "first")
        _, average = _run(capsys, *args)
        assert first["data"]["rho"] == pytest.approx(0.8)
        assert average["data"]["rho"] == pytest.approx(math.sqrt(0.9))

    def test_spearman_help_names_tie_rules(self):
        sub = next(a for a in build_parser()._actions if isinstance(a, argparse._SubParsersAction))
        ties = next(a for a in sub.choices["spearman"]._actions if a.dest == "ties")
        assert ties.default == "average"
        assert "first" in ties.help and "0.8" in ties.help

    def test_spearman_undefined(self, capsys):
        code, response = _run(capsys, "spearman", "--xs", "1,1,1", "--ys", "1,2,3")
        assert code == EXIT_USAGE
        assert not response["success"]

    def test_spearman_over_run(self, enumerated_run, capsys):
        out, _ = enumerated_run
        code, response = _run(capsys, "spearman", "--run", out)
        # a fixed-model run holds one model, so the correlation is undefined
        assert code == EXIT_USAGE


class TestUsage:

    def test_missing_subcommand(self, capsys):
        code, response = _run(capsys)
        assert code == EXIT_USAGE
        assert not response["success"]

    def test_bad_choice(self, capsys):
        code, _ = _run(capsys, "search", "--mode", "speed")
        assert code == EXIT_USAGE
