"""Tests for src/harness/summarize.py."""
import pandas as pd
import pytest

from src.harness.schemas import RECORD_COLUMNS, ExperimentRecord
from src.harness.summarize import final_rows, sign_test, summarize, summary_tables


def _frame(records):
    return pd.DataFrame([r.to_row() for r in records], columns=RECORD_COLUMNS)


def _paired(n_seeds=30, n_wins=25, budget=100):
    records = []
    for seed in range(n_seeds):
        leveraged = 1.0 if seed < n_wins else 3.0
        records.append(ExperimentRecord(experiment="mc", evaluator="lme_leveraged", seed=seed, budget=budget,
                                        entrywise_error=leveraged, frobenius_error=leveraged))
        records.append(ExperimentRecord(experiment="mc", evaluator="cur_uniform_anchors", seed=seed,
                                        budget=budget, entrywise_error=2.0, frobenius_error=2.0))
    return records


class TestSignTest:
    def test_one_sided_p_value(self):
        assert sign_test(25, 5) == pytest.approx(174437 / 2**30)

    def test_no_pairs(self):
        assert sign_test(0, 0) is None


class TestSummarize:
    def test_medians_and_sign_test(self):
        summary = summarize(_frame(_paired()))
        cells = {c["evaluator"]: c for c in summary["cells"]}
        assert cells["lme_leveraged"]["entrywise_error"]["median"] == 1.0
        assert cells["cur_uniform_anchors"]["entrywise_error"]["iqr"] == 0.0
        assert cells["lme_leveraged"]["n_seeds"] == 30
        (test,) = summary["sign_tests"]
        assert (test["wins"], test["losses"], test["ties"]) == (25, 5, 0)
        assert test["p_value"] < 0.01

    def test_ties_are_excluded(self):
        records = _paired(n_seeds=4, n_wins=4)
        records.append(ExperimentRecord(experiment="mc", evaluator="lme_leveraged", seed=9, budget=100,
                                        entrywise_error=2.0))
        records.append(ExperimentRecord(experiment="mc", evaluator="cur_uniform_anchors", seed=9, budget=100,
                                        entrywise_error=2.0))
        (test,) = summarize(_frame(records))["sign_tests"]
        assert test["ties"] == 1
        assert test["p_value"] == pytest.approx(1 / 16)

    def test_failed_rows_are_counted_not_aggregated(self):
        records = _paired(n_seeds=3, n_wins=3)
        records.append(ExperimentRecord(experiment="mc", evaluator="lme_leveraged", seed=7, budget=100,
                                        status="failed", error="BudgetTooSmallError: x"))
        summary = summarize(_frame(records))
        assert summary["n_failed"] == 1
        assert {c["evaluator"]: c["n_seeds"] for c in summary["cells"]}["lme_leveraged"] == 3

    def test_last_epoch_only(self):
        records = [ExperimentRecord(experiment="pi", evaluator="lme_leveraged", seed=0, budget=10, epoch=e,
                                    value_suboptimality=1.0 / e) for e in (1, 2, 4)]
        rows = final_rows(_frame(records))
        assert rows["epoch"].tolist() == [4]

    def test_empty(self):
        with pytest.raises(ValueError):
            summarize(pd.DataFrame(columns=RECORD_COLUMNS))

    def test_tables_render(self):
        text = summary_tables(summarize(_frame(_paired())))
        assert "entrywise_error median" in text
        assert "p_value" in text
