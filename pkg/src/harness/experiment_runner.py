# -*- coding: utf-8 -*-
"""Executes an experiment's (seed, T) cells and writes records, timings and summary."""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
from tqdm import tqdm

from src.core.config import HARNESS_CONFIG
from src.harness.middleware.cell_logging import CellLoggingMiddleware
from src.harness.runners import CELL_RUNNERS, SINGLE_RUNNERS
from src.harness.schemas import ExperimentConfig, ExperimentRecord
from src.harness.summarize import summarize, write_summary
from src.harness.utils.helpers import append_records, append_timing, completed_cells, finalize_records


@dataclass
class RunResult:
    records: pd.DataFrame
    summary: Dict[str, Any]
    records_path: Path
    summary_path: Path
    n_failed: int


class ExperimentRunner:
    """Runs one experiment configuration into ``out_dir``.

    Cells already present in the partial records file are skipped, so an
    interrupted run can be resumed with the same arguments.
    """

    def __init__(self, config: ExperimentConfig, out_dir: Path, logger: logging.Logger,
                 workers: Optional[int] = None):
        self.config = config
        self.out_dir = Path(out_dir)
        self.logger = logger
        self.workers = max(1, workers or HARNESS_CONFIG["WORKERS"])
        self.partial_path = self.out_dir / HARNESS_CONFIG["PARTIAL_RECORDS_FILENAME"]
        self.records_path = self.out_dir / HARNESS_CONFIG["RECORDS_FILENAME"]
        self.timings_path = self.out_dir / HARNESS_CONFIG["TIMINGS_FILENAME"]
        self.summary_path = self.out_dir / HARNESS_CONFIG["SUMMARY_FILENAME"]
        self.middleware = CellLoggingMiddleware(config.experiment_id, logger)

    def cells(self) -> List[Tuple[int, int]]:
        if self.config.kind in SINGLE_RUNNERS:
            return [(0, 0)]
        return [(seed, budget) for seed in self.config.seeds for budget in self.config.budgets]

    def _run_cell(self, seed: int, budget: int) -> Tuple[List[ExperimentRecord], float]:
        if self.config.kind in SINGLE_RUNNERS:
            call = lambda: SINGLE_RUNNERS[self.config.kind](self.config, self.out_dir)  # noqa: E731
        else:
            call = lambda: CELL_RUNNERS[self.config.kind](self.config, seed, budget)  # noqa: E731
        return self.middleware.dispatch(seed, budget, call)

    def run(self) -> RunResult:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        done = completed_cells(self.partial_path)
        pending = [cell for cell in self.cells() if cell not in done]
        if done:
            self.logger.info(f"Resuming: {len(done)} cells already recorded, {len(pending)} to run")
        self.logger.info(f"Running {len(pending)} cells of '{self.config.experiment_id}' with {self.workers} workers")

        # Rows are written only from this thread, as futures complete.
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = {pool.submit(self._run_cell, seed, budget): (seed, budget) for seed, budget in pending}
            for future in tqdm(as_completed(futures), total=len(futures), desc=self.config.experiment_id,
                               unit="cell", disable=not pending):
                seed, budget = futures[future]
                records, wall_time = future.result()
                append_records(self.partial_path, records)
                append_timing(self.timings_path, self.config.experiment_id, seed, budget, wall_time)

        frame = finalize_records(self.partial_path, self.records_path)
        summary = summarize(frame)
        write_summary(summary, self.summary_path)
        n_failed = int((frame["status"] == "failed").sum())
        if n_failed:
            self.logger.warning(f"{n_failed} failed rows recorded in {self.records_path}")
        return RunResult(frame, summary, self.records_path, self.summary_path, n_failed)
