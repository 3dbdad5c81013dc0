import logging
import re
from pathlib import Path
from typing import Iterable, Set, Tuple

import pandas as pd

from src.core.config import HARNESS_CONFIG
from src.harness.schemas import RECORD_COLUMNS, RECORD_KEY, ExperimentRecord

logger = logging.getLogger(__name__)

TEXT_COLUMNS = ["experiment", "evaluator", "status", "warnings", "error"]
# Partial rows are stored at full precision so resumed runs reproduce the same final file.
PARTIAL_FLOAT_FORMAT = "%.17g"
FINAL_FLOAT_FORMAT = "%.10g"


def sanitize_name(input_string: str) -> str:
    """Lower-case identifier safe for use as a directory name."""
    if not input_string:
        return ""
    sanitized = re.sub(r"[^\w\-]+", "_", input_string)
    return sanitized.lower().strip("_")


def schema_header(version: int = HARNESS_CONFIG["CSV_SCHEMA_VERSION"]) -> str:
    return f"# lme-records schema=v{version} columns={','.join(RECORD_COLUMNS)}\n"


def append_records(path: Path, records: Iterable[ExperimentRecord]) -> int:
    """Appends rows to the partial CSV, writing the column header on first use."""
    rows = [r.to_row() for r in records]
    if not rows:
        return 0
    frame = pd.DataFrame(rows, columns=RECORD_COLUMNS)
    exists = path.is_file() and path.stat().st_size > 0
    frame.to_csv(path, mode="a", header=not exists, index=False, float_format=PARTIAL_FLOAT_FORMAT,
                 lineterminator="\n", encoding=HARNESS_CONFIG["FILE_ENCODING"])
    return len(rows)


def read_records(path: Path) -> pd.DataFrame:
    """Reads a partial or final records CSV (header comment lines are skipped)."""
    if not path.is_file():
        raise FileNotFoundError(f"Records file not found: {path}")
    frame = pd.read_csv(path, comment="#", dtype={c: str for c in TEXT_COLUMNS},
                        encoding=HARNESS_CONFIG["FILE_ENCODING"])
    missing = [c for c in RECORD_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path} is missing columns {missing}")
    frame[TEXT_COLUMNS] = frame[TEXT_COLUMNS].fillna("")
    return frame[RECORD_COLUMNS]


def completed_cells(path: Path) -> Set[Tuple[int, int]]:
    """(seed, budget) pairs already present in a partial CSV."""
    if not path.is_file() or path.stat().st_size == 0:
        return set()
    frame = read_records(path)
    return {(int(s), int(b)) for s, b in frame[["seed", "budget"]].drop_duplicates().itertuples(index=False)}


def finalize_records(partial_path: Path, final_path: Path) -> pd.DataFrame:
    """Writes the sorted, versioned records CSV from the partial file."""
    frame = read_records(partial_path)
    frame = frame.drop_duplicates(subset=RECORD_KEY, keep="last").sort_values(RECORD_KEY, kind="mergesort")
    with open(final_path, "w", encoding=HARNESS_CONFIG["FILE_ENCODING"], newline="") as handle:
        handle.write(schema_header())
        frame.to_csv(handle, index=False, float_format=FINAL_FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} records to {final_path}")
    return frame.reset_index(drop=True)


def append_timing(path: Path, experiment: str, seed: int, budget: int, wall_time: float):
    exists = path.is_file() and path.stat().st_size > 0
    pd.DataFrame([{"experiment": experiment, "seed": seed, "budget": budget, "wall_time": wall_time}]).to_csv(
        path, mode="a", header=not exists, index=False, lineterminator="\n",
        encoding=HARNESS_CONFIG["FILE_ENCODING"])
