"""Tests for the typer command-line interface."""
import pytest
from typer.testing import CliRunner

from src.core.errors import ConfigError
from src.harness.cli import EXIT_CONFIG_ERROR, EXIT_EXPERIMENT_FAILURE, app, parse_seeds

runner = CliRunner()

SMALL_CONFIG = """\
kind: matrix_completion
name: cli_small
seeds: [0]
budgets: [20000]
evaluators: [lme_leveraged, cur_uniform_anchors]
matrix: {n_rows: 20, n_cols: 20, rank: 2}
estimator: {rank: 2, n_anchors: 4}
"""


class TestParseSeeds:
    def test_list(self):
        assert parse_seeds("0, 3,7") == [0, 3, 7]

    def test_empty_means_config_seeds(self):
        assert parse_seeds(None) is None
        assert parse_seeds("  ") is None

    @pytest.mark.parametrize("raw", ["a,b", "-1", ","])
    def test_invalid(self, raw):
        with pytest.raises(ConfigError):
            parse_seeds(raw)


class TestCommands:
    def test_run_and_summarize(self, tmp_path):
        config = tmp_path / "small.yaml"
        config.write_text(SMALL_CONFIG)
        out = tmp_path / "out"
        result = runner.invoke(app, ["run", "--config", str(config), "--out", str(out), "--seeds", "0,1",
                                     "--log-level", "WARNING"])
        assert result.exit_code == 0, result.output
        assert (out / "records.csv").is_file()
        assert (out / "summary.json").is_file()

        result = runner.invoke(app, ["summarize", "--in", str(out / "records.csv")])
        assert result.exit_code == 0, result.output
        assert "lme_leveraged" in result.output

    def test_missing_config_exits_with_config_code(self, tmp_path):
        result = runner.invoke(app, ["run", "--config", str(tmp_path / "missing.yaml"), "--log-level", "WARNING"])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_bad_seeds_exit_with_config_code(self, tmp_path):
        config = tmp_path / "small.yaml"
        config.write_text(SMALL_CONFIG)
        result = runner.invoke(app, ["run", "--config", str(config), "--seeds", "x", "--out", str(tmp_path / "o"),
                                     "--log-level", "WARNING"])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_summarize_missing_file(self, tmp_path):
        result = runner.invoke(app, ["summarize", "--in", str(tmp_path / "records.csv")])
        assert result.exit_code == EXIT_EXPERIMENT_FAILURE

    def test_golden_toy(self):
        result = runner.invoke(app, ["golden-toy", "--no-envelope"])
        assert result.exit_code == 0, result.output
        assert "V_max" in result.output
        assert "deviation: VI max cond" in result.output

    def test_missing_mdp_file_exits_with_config_code(self, tmp_path):
        config = tmp_path / "pe.yaml"
        config.write_text("kind: lme_mdp\nbudgets: [1000]\nmdp_path: absent.json\n")
        result = runner.invoke(app, ["run", "--config", str(config), "--out", str(tmp_path / "o"),
                                     "--log-level", "WARNING"])
        assert result.exit_code == EXIT_CONFIG_ERROR
