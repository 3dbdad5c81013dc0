"""LoRa-PI and LoRa-VI runs: one row per epoch plus a final-policy row."""
import logging
from typing import Callable, List

import numpy as np

from src.agents.api_checks import check_api_bound
from src.agents.lora import EpochLog, LoraConfig, lora_pi, lora_vi
from src.core.errors import LmeError
from src.harness.runners.common import evaluation_rng, failed_record, join_warnings, report_record, source_mdp
from src.harness.schemas import ExperimentConfig, ExperimentRecord
from src.tools.mdp import TabularMdp, exact_optimal, policy_value

logger = logging.getLogger(__name__)


def _epoch_rows(config: ExperimentConfig, name: str, seed: int, budget: int,
                logs: List[EpochLog]) -> List[ExperimentRecord]:
    return [report_record(config, name, seed, budget, log.report, log.cond, epoch=log.epoch,
                          value_suboptimality=log.value_gap)
            for log in logs]


def _final_row(config: ExperimentConfig, name: str, seed: int, budget: int, mdp: TabularMdp, policy,
               logs: List[EpochLog], extra_warnings: List[str]) -> ExperimentRecord:
    v_star, _ = exact_optimal(mdp)
    gap = float(np.max(np.abs(v_star - policy_value(mdp, policy))))
    return ExperimentRecord(
        experiment=config.experiment_id,
        evaluator=name,
        seed=seed,
        budget=budget,
        epoch=len(logs) + 1,
        value_suboptimality=gap,
        consumed=sum(log.consumed for log in logs),
        warnings=join_warnings(extra_warnings),
    )


def _run(config: ExperimentConfig, seed: int, budget: int, algorithm: Callable) -> List[ExperimentRecord]:
    mdp = source_mdp(config, seed)
    records = []
    for index, name in enumerate(config.evaluators):
        lora_config = LoraConfig(budget=budget, evaluator=name, estimator=config.estimator, **config.lora)
        rng = evaluation_rng(seed, budget, index)
        try:
            if algorithm is lora_pi:
                policy, logs = lora_pi(mdp, lora_config, rng)
                bound = check_api_bound(mdp, logs)
                extra = [f"api_violations={len(bound.violations)}"] if bound.violations else []
            else:
                _, policy, logs = lora_vi(mdp, lora_config, rng)
                extra = []
        except (LmeError, ValueError) as e:
            records.append(failed_record(config, name, seed, budget, e))
            continue
        records.extend(_epoch_rows(config, name, seed, budget, logs))
        records.append(_final_row(config, name, seed, budget, mdp, policy, logs, extra))
    return records


def run_pi_cell(config: ExperimentConfig, seed: int, budget: int) -> List[ExperimentRecord]:
    return _run(config, seed, budget, lora_pi)


def run_vi_cell(config: ExperimentConfig, seed: int, budget: int) -> List[ExperimentRecord]:
    return _run(config, seed, budget, lora_vi)
