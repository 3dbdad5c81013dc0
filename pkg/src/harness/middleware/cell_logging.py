# harness/middleware/cell_logging.py
import logging
import time
from typing import Callable, List, Tuple

from src.harness.schemas import ExperimentRecord

logger = logging.getLogger(__name__)

CellCall = Callable[[], List[ExperimentRecord]]


class CellLoggingMiddleware:
    """Wraps one (seed, T) cell with START/END/FAIL log lines and wall-clock timing."""

    def __init__(self, experiment_id: str, logger: logging.Logger = logger):
        self.experiment_id = experiment_id
        self.logger = logger

    def dispatch(self, seed: int, budget: int, call_next: CellCall) -> Tuple[List[ExperimentRecord], float]:
        start_time = time.perf_counter()
        log_str = f"Cell: {self.experiment_id} seed={seed} T={budget}"
        self.logger.info(f"START {log_str}")

        try:
            records = call_next()
            wall_time = time.perf_counter() - start_time
            failed = sum(r.status == "failed" for r in records)
            self.logger.info(f"END   {log_str} | Rows: {len(records)} (failed {failed}) | Duration: {wall_time:.2f}s")
            return records, wall_time
        except Exception as e:
            wall_time = time.perf_counter() - start_time
            self.logger.exception(f"FAIL  {log_str} | Duration: {wall_time:.2f}s | Error: {e}")
            raise
