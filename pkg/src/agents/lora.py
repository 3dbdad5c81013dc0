# -*- coding: utf-8 -*-
"""Low-rank approximate policy iteration and value iteration."""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.agents.evaluators import EVALUATORS, EvaluationRequest, get_evaluator
from src.agents.lme_estimator import EstimatorSettings, LmeReport
from src.core.config import LME_DEFAULTS
from src.core.errors import ConfigError, EpochFailure
from src.tools.linalg_core import condition_number
from src.tools.mdp import (
    TabularMdp,
    check_policy,
    exact_optimal,
    exact_policy_q,
    f_operator,
    greedy_policy,
    policy_value,
    random_policy,
)
from src.tools.oracles import BellmanSampleOracle, RolloutOracle

logger = logging.getLogger(__name__)


# --- Configuration ---
class LoraConfig(BaseModel):
    """Inputs of one LoRa-PI or LoRa-VI run.

    ``gamma`` and ``r_max`` default to the MDP's own values.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    budget: int = Field(gt=0)
    eps: float = Field(gt=0.0)
    delta: float = Field(default=0.1, gt=0.0, lt=1.0)
    gamma: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    r_max: Optional[float] = Field(default=None, gt=0.0)
    evaluator: str = "lme_leveraged"
    schedule: Literal["uniform", "geometric"] = "uniform"
    geometric_ratio: float = Field(default=1.1, gt=0.0)
    geometric_base: Optional[float] = Field(default=None, gt=0.0)
    n_epochs: Optional[int] = Field(default=None, ge=1)
    epoch_cap: int = Field(default=LME_DEFAULTS["epoch_cap"], ge=1)
    initial_policy: Union[Literal["zeros", "random"], List[int]] = "zeros"
    initial_values: Optional[List[float]] = None
    estimator: EstimatorSettings = Field(default_factory=EstimatorSettings)

    @model_validator(mode="after")
    def _known_evaluator(self):
        if self.evaluator not in EVALUATORS:
            raise ValueError(f"Unknown evaluator '{self.evaluator}'. Available: {sorted(EVALUATORS)}")
        return self


@dataclass
class EpochLog:
    """One iteration of the outer loop.

    ``q_error`` is ‖Q̂ − Q‖_∞ against the matrix being estimated; ``value_gap``
    is ‖V* − V^π‖_∞ for the policy evaluated in this epoch (PI) or the greedy
    policy of the estimate (VI).
    """
    epoch: int
    policy: np.ndarray
    next_policy: np.ndarray
    q_error: float
    value_gap: float
    budget: int
    consumed: int
    report: LmeReport = field(repr=False)
    cond: Optional[float] = None


# --- Epoch count and schedules ---
def n_epochs(gamma: float, r_max: float, eps: float, cap: int = 500) -> int:
    """⌈(1/(1−γ))·log(4·r_max/((1−γ)·ε))⌉, at least 1 and at most ``cap``."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    raw = math.ceil(math.log(4.0 * r_max / ((1.0 - gamma) * eps)) / (1.0 - gamma))
    return int(min(cap, max(1, raw)))


def budget_schedule(budget: int, epochs: int, schedule: str = "uniform", ratio: float = 1.1,
                    base: Optional[float] = None) -> List[int]:
    """Per-epoch budgets summing to at most ``budget``.

    ``uniform`` gives ⌊T/N⌋ each. ``geometric`` with ``base`` b gives
    ⌊b·ρᵗ⌋ until T runs out; without a base the weights ρᵗ split T
    proportionally.
    """
    if epochs < 1:
        raise ValueError(f"epochs must be positive, got {epochs}")
    if schedule == "uniform":
        return [budget // epochs] * epochs
    if schedule != "geometric":
        raise ValueError(f"Unknown budget schedule: {schedule}")
    growth = ratio ** np.arange(epochs)
    if base is None:
        return [int(x) for x in np.floor(budget * growth / growth.sum())]
    out, left = [], budget
    for raw in np.floor(base * growth):
        share = int(min(raw, left))
        out.append(share)
        left -= share
    return out


def _initial_policy(mdp: TabularMdp, config: LoraConfig, rng: np.random.Generator) -> np.ndarray:
    if config.initial_policy == "zeros":
        return np.zeros(mdp.n_states, dtype=np.int64)
    if config.initial_policy == "random":
        return random_policy(mdp.n_states, mdp.n_actions, rng)
    return check_policy(mdp, np.asarray(config.initial_policy, dtype=np.int64))


def _plan_epochs(mdp: TabularMdp, config: LoraConfig) -> Tuple[float, float, List[int]]:
    gamma = config.gamma if config.gamma is not None else mdp.gamma
    r_max = config.r_max if config.r_max is not None else mdp.r_max
    epochs = config.n_epochs or n_epochs(gamma, r_max, config.eps, config.epoch_cap)
    if config.budget < epochs:
        raise ConfigError(f"budget T={config.budget} is smaller than the number of epochs {epochs}")
    budgets = budget_schedule(config.budget, epochs, config.schedule, config.geometric_ratio,
                              config.geometric_base)
    return gamma, r_max, budgets


# --- LoRa-PI ---
def lora_pi(mdp: TabularMdp, config: LoraConfig, rng: np.random.Generator,
            logger: logging.Logger = logger) -> Tuple[np.ndarray, List[EpochLog]]:
    """Approximate policy iteration with a pluggable matrix evaluator.

    Each epoch estimates Q^π from rollouts within its budget and improves the
    policy greedily.

    Raises:
        EpochFailure: when the evaluator fails; carries the epoch index.
    """
    gamma, r_max, budgets = _plan_epochs(mdp, config)
    evaluate = get_evaluator(config.evaluator)
    init_rng, *epoch_rngs = rng.spawn(len(budgets) + 1)
    policy = _initial_policy(mdp, config, init_rng)
    v_star, _ = exact_optimal(mdp)
    logger.info(f"LoRa-PI: {len(budgets)} epochs, evaluator={config.evaluator}, T={config.budget}")

    logs: List[EpochLog] = []
    for epoch, (epoch_budget, epoch_rng) in enumerate(zip(budgets, epoch_rngs), start=1):
        # Exact Q^π is only used for the logs; the evaluator never sees it unless it asks (e.g. oracle anchors)
        truth = exact_policy_q(mdp, policy)
        request = EvaluationRequest(RolloutOracle(mdp, policy), epoch_budget, config.delta, gamma, r_max,
                                    epoch_rng, config.estimator, truth)
        try:
            q_hat, report = evaluate(request)
        except Exception as e:
            logger.error(f"Epoch {epoch} evaluation failed: {e}", exc_info=True)
            raise EpochFailure(epoch, e) from e

        improved = greedy_policy(q_hat)
        logs.append(EpochLog(
            epoch=epoch,
            policy=policy,
            next_policy=improved,
            q_error=float(np.max(np.abs(q_hat - truth))),
            value_gap=float(np.max(np.abs(v_star - policy_value(mdp, policy)))),
            budget=epoch_budget,
            consumed=int(report.get("consumed", 0)),
            report=report,
        ))
        logger.debug(f"Epoch {epoch}: q_error={logs[-1].q_error:.4g} value_gap={logs[-1].value_gap:.4g}")
        policy = improved
    return policy, logs


# --- LoRa-VI ---
def lora_vi(mdp: TabularMdp, config: LoraConfig, rng: np.random.Generator,
            logger: logging.Logger = logger) -> Tuple[np.ndarray, np.ndarray, List[EpochLog]]:
    """Approximate value iteration: V ← max_a Q̂ with Q̂ an estimate of F(V).

    Observations are one-step samples r + γV(s'), so the estimator runs with
    γ = 0 and the observation bound r_max + γ‖V‖_∞.
    """
    _, _, budgets = _plan_epochs(mdp, config)
    evaluate = get_evaluator(config.evaluator)
    epoch_rngs = rng.spawn(len(budgets))
    values = (np.zeros(mdp.n_states) if config.initial_values is None
              else np.asarray(config.initial_values, dtype=float))
    if values.shape != (mdp.n_states,):
        raise ConfigError(f"initial_values must have length {mdp.n_states}")
    v_star, _ = exact_optimal(mdp)
    policy = greedy_policy(f_operator(mdp, values))
    logger.info(f"LoRa-VI: {len(budgets)} epochs, evaluator={config.evaluator}, T={config.budget}")

    logs: List[EpochLog] = []
    for epoch, (epoch_budget, epoch_rng) in enumerate(zip(budgets, epoch_rngs), start=1):
        oracle = BellmanSampleOracle(mdp, values)
        truth = oracle.target()
        request = EvaluationRequest(oracle, epoch_budget, config.delta, 0.0, oracle.observation_bound,
                                    epoch_rng, config.estimator, truth)
        try:
            q_hat, report = evaluate(request)
        except Exception as e:
            logger.error(f"Epoch {epoch} evaluation failed: {e}", exc_info=True)
            raise EpochFailure(epoch, e) from e

        improved = greedy_policy(q_hat)
        logs.append(EpochLog(
            epoch=epoch,
            policy=policy,
            next_policy=improved,
            q_error=float(np.max(np.abs(q_hat - truth))),
            value_gap=float(np.max(np.abs(v_star - policy_value(mdp, improved)))),
            budget=epoch_budget,
            consumed=int(report.get("consumed", 0)),
            report=report,
            cond=condition_number(truth),
        ))
        # V ← max_a Q̂(·, a)
        values = q_hat.max(axis=1)
        policy = improved
    return values, policy, logs
