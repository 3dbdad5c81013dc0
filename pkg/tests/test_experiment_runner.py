"""End-to-end runs of small experiments through ExperimentRunner."""
import logging

import pandas as pd
import pytest

from src.core.config import HARNESS_CONFIG
from src.harness.experiment_runner import ExperimentRunner
from src.harness.middleware.cell_logging import CellLoggingMiddleware
from src.harness.schemas import ExperimentConfig
from src.harness.utils.helpers import read_records

logger = logging.getLogger("test_runner")


def _matrix_config(**overrides):
    payload = {
        "kind": "matrix_completion",
        "name": "mc_small",
        "seeds": [0, 1],
        "budgets": [100, 20_000, 80_000],
        "evaluators": ["lme_leveraged", "cur_uniform_anchors"],
        "matrix": {"n_rows": 30, "n_cols": 30, "rank": 2, "coherence": "spiky"},
        "estimator": {"rank": 2, "n_anchors": 4},
    }
    payload.update(overrides)
    return ExperimentConfig.model_validate(payload)


class TestMatrixCompletionRun:
    def test_outputs_and_failed_rows(self, tmp_path):
        result = ExperimentRunner(_matrix_config(), tmp_path, logger).run()
        frame = result.records
        assert len(frame) == 2 * 3 * 2
        assert result.n_failed == 4
        assert (frame.loc[frame["budget"] == 100, "status"] == "failed").all()
        assert frame.loc[frame["budget"] == 100, "error"].str.startswith("BudgetTooSmallError").all()
        ok = frame[frame["status"] == "ok"]
        assert (ok["consumed"] <= ok["budget"]).all()
        assert result.summary_path.is_file()
        timings = pd.read_csv(tmp_path / HARNESS_CONFIG["TIMINGS_FILENAME"])
        assert len(timings) == 6
        assert "wall_time" not in frame.columns

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        ExperimentRunner(_matrix_config(), tmp_path / "one", logger, workers=1).run()
        ExperimentRunner(_matrix_config(), tmp_path / "three", logger, workers=3).run()
        name = HARNESS_CONFIG["RECORDS_FILENAME"]
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "three" / name).read_bytes()

    def test_resume_only_runs_missing_cells(self, tmp_path):
        ExperimentRunner(_matrix_config(seeds=[0]), tmp_path / "resumed", logger).run()
        runner = ExperimentRunner(_matrix_config(), tmp_path / "resumed", logger)
        assert len([c for c in runner.cells() if c[0] == 1]) == 3
        runner.run()
        ExperimentRunner(_matrix_config(), tmp_path / "fresh", logger).run()
        name = HARNESS_CONFIG["RECORDS_FILENAME"]
        assert (tmp_path / "resumed" / name).read_bytes() == (tmp_path / "fresh" / name).read_bytes()
        timings = pd.read_csv(tmp_path / "resumed" / HARNESS_CONFIG["TIMINGS_FILENAME"])
        assert len(timings) == 6


class TestOtherKinds:
    def test_lme_mdp(self, tmp_path):
        config = ExperimentConfig.model_validate({
            "kind": "lme_mdp", "seeds": [0], "budgets": [2_000_000],
            "evaluators": ["lme_leveraged", "full_matrix_mc"],
            "generator": {"n_states": 8, "n_actions": 6, "rank": 2, "gamma": 0.5},
            "estimator": {"rank": 2, "n_anchors": 3},
        })
        frame = ExperimentRunner(config, tmp_path, logger).run().records
        assert (frame["status"] == "ok").all()
        assert frame["entrywise_error"].notna().all()

    def test_lora_pi_rows(self, tmp_path):
        config = ExperimentConfig.model_validate({
            "kind": "lora_pi", "seeds": [0], "budgets": [50],
            "evaluators": ["exact"], "toy_mdp": True,
            "lora": {"eps": 0.1, "n_epochs": 3},
        })
        frame = ExperimentRunner(config, tmp_path, logger).run().records
        assert frame["epoch"].tolist() == [1, 2, 3, 4]
        assert frame["value_suboptimality"].iloc[-1] == pytest.approx(0.0, abs=1e-9)
        assert (frame["warnings"] == "").all()

    def test_lora_vi_rows_carry_condition_numbers(self, tmp_path):
        config = ExperimentConfig.model_validate({
            "kind": "lora_vi", "seeds": [0], "budgets": [50],
            "evaluators": ["exact"], "toy_mdp": True,
            "lora": {"eps": 0.1, "n_epochs": 20, "initial_values": [2.86, 2.98]},
        })
        frame = ExperimentRunner(config, tmp_path, logger).run().records
        epochs = frame[frame["epoch"] <= 20]
        assert epochs["condition_number"].max() == pytest.approx(2140.27, rel=1e-3)

    def test_cond_landscape_writes_grid(self, tmp_path):
        config = ExperimentConfig.model_validate({"kind": "cond_landscape", "toy_mdp": True,
                                                  "landscape_resolution": 5})
        ExperimentRunner(config, tmp_path, logger).run()
        grid = pd.read_csv(tmp_path / HARNESS_CONFIG["LANDSCAPE_FILENAME"])
        assert len(grid) == 25
        assert (tmp_path / HARNESS_CONFIG["LANDSCAPE_OVERLAY_FILENAME"]).is_file()

    def test_toy_golden_records(self, tmp_path):
        config = ExperimentConfig.model_validate({"kind": "toy_golden"})
        ExperimentRunner(config, tmp_path, logger).run()
        frame = read_records(tmp_path / HARNESS_CONFIG["RECORDS_FILENAME"])
        policies = frame[frame["evaluator"].str.startswith("policy_")]
        assert sorted(policies["evaluator"]) == ["policy_00", "policy_01", "policy_10", "policy_11"]


class TestCellLogging:
    def test_returns_records_and_time(self):
        records, wall_time = CellLoggingMiddleware("exp", logger).dispatch(0, 10, lambda: [])
        assert records == [] and wall_time >= 0.0

    def test_reraises(self):
        def boom():
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError, match="boom"):
            CellLoggingMiddleware("exp", logger).dispatch(0, 10, boom)
