"""Helpers shared by the experiment runners: seeded streams, instances and rows."""
import logging
from typing import List, Optional

import numpy as np

from src.agents.lme_estimator import LmeReport
from src.harness.schemas import ExperimentConfig, ExperimentRecord
from src.tools.generators import generate_lowrank_mdp
from src.tools.mdp import TabularMdp, check_policy, load_mdp, load_toy_mdp, random_policy
from src.tools.oracles import rng_stream

logger = logging.getLogger(__name__)

# Stream keys. An instance depends on the seed only, so every budget of a
# sweep sees the same matrix or MDP.
INSTANCE_STREAM = 0
POLICY_STREAM = 1
EVALUATION_STREAM = 2


def instance_rng(seed: int) -> np.random.Generator:
    return rng_stream(seed, INSTANCE_STREAM)


def evaluation_rng(seed: int, budget: int, evaluator_index: int) -> np.random.Generator:
    return rng_stream(seed, EVALUATION_STREAM, budget, evaluator_index)


def source_mdp(config: ExperimentConfig, seed: int) -> TabularMdp:
    """The MDP named by the config; generated ones are redrawn per seed."""
    if config.generator is not None:
        return generate_lowrank_mdp(config.generator, instance_rng(seed))
    if config.mdp_path is not None:
        return load_mdp(config.mdp_path)
    return load_toy_mdp()


def evaluated_policy(config: ExperimentConfig, mdp: TabularMdp, seed: int) -> np.ndarray:
    if config.policy == "zeros":
        return np.zeros(mdp.n_states, dtype=np.int64)
    if config.policy == "random":
        return random_policy(mdp.n_states, mdp.n_actions, rng_stream(seed, POLICY_STREAM))
    return check_policy(mdp, config.policy)


def report_record(config: ExperimentConfig, evaluator: str, seed: int, budget: int, report: LmeReport,
                  condition_number: Optional[float] = None, epoch: int = 0,
                  value_suboptimality: Optional[float] = None) -> ExperimentRecord:
    return ExperimentRecord(
        experiment=config.experiment_id,
        evaluator=evaluator,
        seed=seed,
        budget=budget,
        epoch=epoch,
        entrywise_error=report.get("entrywise_error"),
        frobenius_error=report.get("frobenius_error"),
        value_suboptimality=value_suboptimality,
        condition_number=condition_number,
        d_hat=report.get("d_hat"),
        consumed=report.get("consumed"),
        warnings=";".join(report.get("warnings", [])),
    )


def failed_record(config: ExperimentConfig, evaluator: str, seed: int, budget: int, error: BaseException,
                  epoch: int = 0) -> ExperimentRecord:
    logger.warning(f"Cell ({config.experiment_id}, {evaluator}, seed={seed}, T={budget}) failed: {error}")
    return ExperimentRecord(
        experiment=config.experiment_id,
        evaluator=evaluator,
        seed=seed,
        budget=budget,
        epoch=epoch,
        status="failed",
        error=f"{type(error).__name__}: {error}",
    )


def join_warnings(items: List[str]) -> str:
    return ";".join(w for w in items if w)
