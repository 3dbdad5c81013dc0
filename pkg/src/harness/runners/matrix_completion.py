"""Noisy low-rank matrix completion: all evaluators on one matrix per seed."""
import logging
from typing import List

import numpy as np

from src.agents.evaluators import EvaluationRequest, get_evaluator
from src.core.errors import LmeError
from src.harness.runners.common import evaluation_rng, failed_record, instance_rng, report_record
from src.harness.schemas import ExperimentConfig, ExperimentRecord
from src.tools.generators import generate_lowrank_matrix
from src.tools.linalg_core import condition_number
from src.tools.oracles import NoisyMatrixOracle

logger = logging.getLogger(__name__)


def run_cell(config: ExperimentConfig, seed: int, budget: int) -> List[ExperimentRecord]:
    matrix = generate_lowrank_matrix(config.matrix, instance_rng(seed))
    oracle = NoisyMatrixOracle(matrix, config.noise_std)
    r_max = float(np.max(np.abs(matrix)))
    cond = condition_number(matrix, config.matrix.rank)

    records = []
    for index, name in enumerate(config.evaluators):
        request = EvaluationRequest(oracle, budget, config.delta, 0.0, r_max, evaluation_rng(seed, budget, index),
                                    config.estimator, matrix)
        try:
            _, report = get_evaluator(name)(request)
        except (LmeError, ValueError) as e:
            records.append(failed_record(config, name, seed, budget, e))
            continue
        records.append(report_record(config, name, seed, budget, report, cond))
    return records
