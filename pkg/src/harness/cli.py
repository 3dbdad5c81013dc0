"""Command-line entry point: ``python -m src.harness.cli <command>``."""
import logging
from pathlib import Path
from typing import List, Optional

import pandas as pd
import typer

from src.app import run_experiment_task
from src.core.config import HARNESS_CONFIG, TASK_LOGGER_NAME
from src.core.errors import ConfigError
from src.core.logging_config import setup_logging
from src.harness.runners.toy_golden import run_golden
from src.harness.schemas import load_config
from src.harness.summarize import summarize, summary_tables, write_summary
from src.harness.utils.helpers import read_records

EXIT_CONFIG_ERROR = 2
EXIT_EXPERIMENT_FAILURE = 3

app = typer.Typer(add_completion=False, help="Leveraged matrix estimation experiments.")
logger = logging.getLogger(TASK_LOGGER_NAME)


def parse_seeds(raw: Optional[str]) -> Optional[List[int]]:
    if raw is None or not raw.strip():
        return None
    try:
        seeds = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"--seeds must be a comma-separated list of integers, got {raw!r}") from e
    if not seeds or any(s < 0 for s in seeds):
        raise ConfigError(f"--seeds must list at least one non-negative integer, got {raw!r}")
    return seeds


@app.command()
def run(
    config: Path = typer.Option(..., "--config", help="JSON or YAML experiment file."),
    seeds: Optional[str] = typer.Option(None, "--seeds", help="Comma-separated seeds overriding the config."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output directory."),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Thread-pool size (default LME_WORKERS)."),
    log_level: Optional[str] = typer.Option(None, "--log-level"),
):
    """Run an experiment and write records.csv, timings.csv and summary.json."""
    setup_logging(log_level)
    try:
        experiment = load_config(config)
        result = run_experiment_task(experiment, logger, str(out) if out else None, parse_seeds(seeds), workers)
    except ConfigError as e:
        typer.echo(f"Config error: {e}", err=True)
        raise typer.Exit(code=EXIT_CONFIG_ERROR)
    except Exception as e:
        typer.echo(f"Experiment failed: {e}", err=True)
        raise typer.Exit(code=EXIT_EXPERIMENT_FAILURE)
    typer.echo(summary_tables(result.summary))
    typer.echo(f"Records: {result.records_path}")


@app.command("summarize")
def summarize_command(
    records: Path = typer.Option(..., "--in", help="records.csv produced by 'run'."),
    log_level: Optional[str] = typer.Option(None, "--log-level"),
):
    """Recompute medians, IQRs and sign tests from a records CSV."""
    setup_logging(log_level, log_to_file=False)
    try:
        summary = summarize(read_records(records))
    except (FileNotFoundError, ValueError) as e:
        typer.echo(f"Cannot summarize {records}: {e}", err=True)
        raise typer.Exit(code=EXIT_EXPERIMENT_FAILURE)
    path = write_summary(summary, records.parent / HARNESS_CONFIG["SUMMARY_FILENAME"])
    typer.echo(summary_tables(summary))
    typer.echo(f"Summary: {path}")


@app.command("golden-toy")
def golden_toy(
    envelope: bool = typer.Option(True, "--envelope/--no-envelope", help="Scan the rounded VI start."),
):
    """Print the reference numbers of the two-state MDP."""
    setup_logging("WARNING", log_to_file=False)
    report = run_golden(envelope=envelope)
    table = pd.DataFrame(report.rows(), columns=["quantity", "computed", "reference"])
    typer.echo(table.to_markdown(index=False, floatfmt=".4f"))
    for message in report.deviations:
        typer.echo(f"deviation: {message}")


if __name__ == "__main__":
    app()
