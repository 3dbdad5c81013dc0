# core/config.py
import os
from pathlib import Path

from dotenv import load_dotenv, find_dotenv

# --- Environment Variable Handling ---
# A .env file in the project root may override anything below.
load_dotenv(find_dotenv(), verbose=False, override=False)

# --- Project Structure Setup ---
# Assumes this file is in src/core/
CORE_DIR = Path(__file__).parent
SRC_DIR = CORE_DIR.parent
PROJECT_ROOT = SRC_DIR.parent

# --- Logging Setup ---
LOG_DIR = PROJECT_ROOT / "logs"
LOG_LEVEL = os.getenv("LME_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(levelname)s - [%(name)s] - %(message)s"

# --- Harness Configuration ---
HARNESS_CONFIG = {
    "OUTPUT_DIR": Path(os.getenv("LME_OUTPUT_DIR", str(PROJECT_ROOT / "output"))),
    "WORKERS": max(1, int(os.getenv("LME_WORKERS", "1"))),
    "RECORDS_FILENAME": "records.csv",
    "PARTIAL_RECORDS_FILENAME": "records.partial.csv",
    "TIMINGS_FILENAME": "timings.csv",
    "SUMMARY_FILENAME": "summary.json",
    "LANDSCAPE_FILENAME": "cond_landscape.csv",
    "LANDSCAPE_OVERLAY_FILENAME": "cond_landscape_overlay.csv",
    "CSV_SCHEMA_VERSION": 1,
    "FILE_ENCODING": "utf-8",
}

# --- Estimator Defaults ---
# Values here are the fallbacks for any key missing from an experiment's
# algorithm block.
LME_DEFAULTS = {
    "beta_scale": 1.0,
    "beta": None,
    "anchor_mode": "bernoulli",
    "n_anchors": None,
    "pinv_rtol": 1e-10,
    "max_anchor_redraws": 16,
    "rank_tol": None,
    "rank": None,
    "epoch_cap": 500,
}

# --- Golden values for the two-state example ---
TOY_GOLDEN = {
    "policy_condition_numbers": [16.08, 4.38, 15.29, 12.07],
    "v_max": 3.69,
    "vi_max_condition_number": 2497.82,
    "vi_initial_values": [2.86, 2.98],
}

# --- Logger names ---
TASK_LOGGER_NAME = "LMEExperimentTask"
