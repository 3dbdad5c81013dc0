"""Aggregation of experiment records: medians, IQRs and paired sign tests."""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import orjson
import pandas as pd
from scipy.stats import binomtest

logger = logging.getLogger(__name__)

METRICS = ["entrywise_error", "frobenius_error", "value_suboptimality"]
GROUP_KEY = ["experiment", "evaluator", "budget"]
LEVERAGED = "lme_leveraged"
UNIFORM = "cur_uniform_anchors"


def final_rows(records: pd.DataFrame) -> pd.DataFrame:
    """Successful rows, keeping only the last epoch per (experiment, evaluator, seed, budget)."""
    ok = records[records["status"] == "ok"]
    last = ok.groupby(["experiment", "evaluator", "seed", "budget"])["epoch"].transform("max")
    return ok[ok["epoch"] == last]


def sign_test(wins: int, losses: int) -> Optional[float]:
    """One-sided p-value that wins are more likely than losses; ties are excluded beforehand."""
    n = wins + losses
    if n == 0:
        return None
    return float(binomtest(wins, n, 0.5, alternative="greater").pvalue)


def _paired_tests(rows: pd.DataFrame, metric: str = "entrywise_error") -> List[Dict[str, Any]]:
    tests = []
    for (experiment, budget), group in rows.groupby(["experiment", "budget"], sort=True):
        wide = group.pivot_table(index="seed", columns="evaluator", values=metric, aggfunc="first")
        if LEVERAGED not in wide.columns or UNIFORM not in wide.columns:
            continue
        paired = wide[[LEVERAGED, UNIFORM]].dropna()
        wins = int((paired[LEVERAGED] < paired[UNIFORM]).sum())
        losses = int((paired[LEVERAGED] > paired[UNIFORM]).sum())
        tests.append({
            "experiment": experiment,
            "budget": int(budget),
            "metric": metric,
            "wins": wins,
            "losses": losses,
            "ties": int(len(paired) - wins - losses),
            "p_value": sign_test(wins, losses),
        })
    return tests


def summarize(records: pd.DataFrame) -> Dict[str, Any]:
    """Median and interquartile range per (experiment, evaluator, T), plus leveraged-vs-uniform sign tests.

    Raises:
        ValueError: for an empty record set.
    """
    if records is None or records.empty:
        raise ValueError("cannot summarize an empty record set")
    rows = final_rows(records)
    failed = records[records["status"] == "failed"]

    cells = []
    for key, group in rows.groupby(GROUP_KEY, sort=True):
        cell = dict(zip(GROUP_KEY, key))
        cell["budget"] = int(cell["budget"])
        cell["n_seeds"] = int(group["seed"].nunique())
        for metric in METRICS:
            values = group[metric].dropna().to_numpy(dtype=float)
            if values.size == 0:
                continue
            q1, median, q3 = np.percentile(values, [25, 50, 75])
            cell[metric] = {"median": float(median), "q1": float(q1), "q3": float(q3), "iqr": float(q3 - q1)}
        cells.append(cell)

    summary = {
        "cells": cells,
        "sign_tests": _paired_tests(rows),
        "n_records": int(len(records)),
        "n_failed": int(len(failed)),
    }
    logger.info(f"Summarized {len(records)} records into {len(cells)} cells ({len(failed)} failed rows)")
    return summary


def summary_tables(summary: Dict[str, Any]) -> str:
    """Markdown tables (via tabulate) of the median/IQR cells and sign tests."""
    flat = []
    for cell in summary["cells"]:
        row = {k: cell[k] for k in GROUP_KEY + ["n_seeds"]}
        for metric in METRICS:
            if metric in cell:
                row[f"{metric} median"] = cell[metric]["median"]
                row[f"{metric} iqr"] = cell[metric]["iqr"]
        flat.append(row)
    parts = [pd.DataFrame(flat).to_markdown(index=False, floatfmt=".4g")]
    if summary["sign_tests"]:
        parts.append(pd.DataFrame(summary["sign_tests"]).to_markdown(index=False, floatfmt=".3g"))
    return "\n\n".join(parts)


def write_summary(summary: Dict[str, Any], path: Path) -> Path:
    path.write_bytes(orjson.dumps(summary, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS))
    return path
