"""Numerical checks of the approximate-policy-iteration guarantees on recorded runs."""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from src.agents.lora import EpochLog
from src.tools.mdp import TabularMdp, bellman_optimal, exact_optimal, policy_value

logger = logging.getLogger(__name__)


@dataclass
class BoundViolation:
    epoch: int
    kind: str
    excess: float


@dataclass
class BoundReport:
    """Per-epoch value gaps next to their guaranteed upper bounds."""
    epsilon: float
    initial_gap: float
    gaps: List[float] = field(default_factory=list)
    bounds: List[float] = field(default_factory=list)
    violations: List[BoundViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_api_bound(mdp: TabularMdp, logs: Sequence[EpochLog], tol: float = 1e-9) -> BoundReport:
    """Checks two inequalities on every epoch of a policy-iteration run.

    With ε = max_t ‖Q̂⁽ᵗ⁾ − Q^{π_t}‖_∞:

    * ‖V* − V^{π_{t+1}}‖_∞ ≤ γᵗ‖V* − V^{π_1}‖_∞ + 2ε/(1−γ)²;
    * V^{π_t} ≤ T*V^{π_t} ≤ V^{π_{t+1}} + 2ε_t/(1−γ) componentwise.

    Violations beyond ``tol`` are listed, not raised.
    """
    if not logs:
        raise ValueError("no epoch logs to check")
    gamma = mdp.gamma
    v_star, _ = exact_optimal(mdp)
    eps = max(log.q_error for log in logs)
    initial_gap = float(np.max(np.abs(v_star - policy_value(mdp, logs[0].policy))))
    report = BoundReport(epsilon=eps, initial_gap=initial_gap)

    for log in logs:
        v_pi = policy_value(mdp, log.policy)
        v_next = policy_value(mdp, log.next_policy)
        gap = float(np.max(np.abs(v_star - v_next)))
        bound = gamma ** log.epoch * initial_gap + 2.0 * eps / (1.0 - gamma) ** 2
        report.gaps.append(gap)
        report.bounds.append(bound)
        if gap > bound + tol:
            report.violations.append(BoundViolation(log.epoch, "convergence", gap - bound))

        # Improvement step: V^π ≤ T*V^π always; the upper side is where estimation error shows up
        backup = bellman_optimal(mdp, v_pi)
        lower = float(np.max(v_pi - backup))
        upper = float(np.max(backup - v_next - 2.0 * log.q_error / (1.0 - gamma)))
        if lower > tol:
            report.violations.append(BoundViolation(log.epoch, "improvement_lower", lower))
        if upper > tol:
            report.violations.append(BoundViolation(log.epoch, "improvement_upper", upper))

    if report.violations:
        logger.warning(f"{len(report.violations)} bound violations over {len(logs)} epochs")
    return report
