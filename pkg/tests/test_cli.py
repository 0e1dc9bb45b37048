"""Command-line interface: subcommands, exit codes, emitted files."""

import json

import pytest
import yaml

from hidlr.harness.cli import main
from hidlr.harness.metrics import read_jsonl
from hidlr.problems import PROBLEM_NAMES


@pytest.fixture
def ellipse_yaml(tmp_path):
    path = tmp_path / "ellipse.yaml"
    path.write_text(
        yaml.safe_dump(
            {"problem": "ellipse", "method": "hidlr", "seed": 0, "iterations": 10}
        )
    )
    return path


class TestInformationalCommands:
    def test_list_problems(self, capsys):
        assert main(["list-problems"]) == 0
        out = capsys.readouterr().out.split()
        assert out == sorted(out)
        assert set(out) == set(PROBLEM_NAMES)

    def test_budget(self, capsys):
        assert main(["budget", "100", "2", "10"]) == 0
        assert capsys.readouterr().out.strip() == "180"

    def test_budget_invalid_arguments(self, capsys):
        assert main(["budget", "0", "2", "10"]) == 1
        assert "error" in capsys.readouterr().err


class TestRunCommand:
    def test_run_writes_metrics(self, ellipse_yaml, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["run", str(ellipse_yaml), "--out", str(out)])
        assert code == 0
        assert (out / "metrics.jsonl").exists()
        assert (out / "probes.jsonl").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["problem"] == "ellipse"
        assert summary["total_steps"] == 10
        assert "wrote" in capsys.readouterr().out

    def test_seed_flag_overrides_config(self, ellipse_yaml, tmp_path):
        out = tmp_path / "out"
        main(["run", str(ellipse_yaml), "--seed", "42", "--out", str(out)])
        summary = json.loads((out / "summary.json").read_text())
        assert summary["seed"] == 42

    def test_override_flag(self, ellipse_yaml, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "run",
                str(ellipse_yaml),
                "--out",
                str(out),
                "--override",
                "iterations=4",
                "--override",
                "hidlr.phi=2",
            ]
        )
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["total_steps"] == 4
        refreshes = [
            r for r in read_jsonl(out / "probes.jsonl") if r["kind"] == "refresh"
        ]
        assert [r["t"] for r in refreshes] == [0, 2]

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.yaml")]) == 1
        assert "config error" in capsys.readouterr().err

    def test_bad_config_key(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("problem: ellipse\nmethod: hidlr\nseed: 0\nlerning_rate: 1\n")
        assert main(["run", str(path)]) == 1
        assert "lerning_rate" in capsys.readouterr().err

    def test_bad_override_value(self, ellipse_yaml, capsys):
        assert main(["run", str(ellipse_yaml), "--override", "hidlr.gamma=2"]) == 1
        assert "gamma" in capsys.readouterr().err


class TestGridCommand:
    def test_grid_forces_method(self, ellipse_yaml, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["grid", str(ellipse_yaml), "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert "grid" in summary
        assert "best_lr" in capsys.readouterr().out


class TestDiagCommand:
    def test_diag_writes_table(self, ellipse_yaml, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["diag", str(ellipse_yaml), "--out", str(out)]) == 0
        rows = read_jsonl(out / "diagnostics.jsonl")
        # two groups, four probe scales each
        assert len(rows) == 8
        assert {r["group_name"] for r in rows} == {"x", "y"}
        printed = capsys.readouterr().out
        assert "pooled_r2=1.000000" in printed  # quadratic: exact fit
