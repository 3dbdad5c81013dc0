import logging
from pathlib import Path
from typing import List, Optional

from src.core.config import HARNESS_CONFIG
from src.harness.experiment_runner import ExperimentRunner, RunResult
from src.harness.schemas import ExperimentConfig
from src.harness.utils.helpers import sanitize_name


def run_experiment_task(
    config: ExperimentConfig,
    logger: logging.Logger,
    output_dir: Optional[str] = None,
    seeds: Optional[List[int]] = None,
    workers: Optional[int] = None,
) -> RunResult:
    """
    Runs one experiment end to end: cells, records CSV and JSON summary.
    Designed to be called by the CLI, which maps exceptions to exit codes.
    """
    if seeds:
        config = config.model_copy(update={"seeds": list(seeds)})
    base = output_dir or config.output_dir
    output_path = Path(base) if base else HARNESS_CONFIG["OUTPUT_DIR"] / sanitize_name(config.experiment_id)

    logger.info(f"--- Starting Experiment '{config.experiment_id}' ({config.kind}) ---")
    logger.info(f"Seeds: {config.seeds}")
    logger.info(f"Budgets: {config.budgets}")
    logger.info(f"Output Path: {output_path}")

    runner = ExperimentRunner(config, output_path, logger, workers)
    try:
        result = runner.run()
        logger.info(f"--- Experiment '{config.experiment_id}' Completed: {len(result.records)} records ---")
        return result
    except FileNotFoundError as e:
        logger.error(f"File not found during experiment: {e}", exc_info=True)
        raise
    except ValueError as e:
        logger.error(f"Configuration or value error during experiment: {e}", exc_info=True)
        raise
    except Exception as e:
        logger.error(f"Experiment failed unexpectedly: {e}", exc_info=True)
        raise
