"""Policy evaluation from rollouts: estimate Q^π of a fixed policy per seed."""
import logging
from typing import List

from src.agents.evaluators import EvaluationRequest, get_evaluator
from src.core.errors import LmeError
from src.harness.runners.common import evaluated_policy, evaluation_rng, failed_record, report_record, source_mdp
from src.harness.schemas import ExperimentConfig, ExperimentRecord
from src.tools.linalg_core import condition_number
from src.tools.mdp import exact_policy_q
from src.tools.oracles import RolloutOracle

logger = logging.getLogger(__name__)


def run_cell(config: ExperimentConfig, seed: int, budget: int) -> List[ExperimentRecord]:
    mdp = source_mdp(config, seed)
    policy = evaluated_policy(config, mdp, seed)
    truth = exact_policy_q(mdp, policy)
    oracle = RolloutOracle(mdp, policy)
    rank = config.generator.rank if config.generator is not None else None
    cond = condition_number(truth, rank)

    records = []
    for index, name in enumerate(config.evaluators):
        request = EvaluationRequest(oracle, budget, config.delta, mdp.gamma, mdp.r_max,
                                    evaluation_rng(seed, budget, index), config.estimator, truth)
        try:
            _, report = get_evaluator(name)(request)
        except (LmeError, ValueError) as e:
            records.append(failed_record(config, name, seed, budget, e))
            continue
        records.append(report_record(config, name, seed, budget, report, cond))
    return records
