"""Reference numbers of the two-state toy MDP.

The VI starting point is rounded to two decimals, and the maximum
condition number along the VI path is very sensitive to it; the report
therefore carries the maximum over a small box around the rounded start.
"""
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import TOY_GOLDEN
from src.harness.schemas import ExperimentConfig, ExperimentRecord
from src.tools.linalg_core import condition_number
from src.tools.mdp import TabularMdp, exact_policy_q, load_toy_mdp, value_iteration

logger = logging.getLogger(__name__)

POLICY_TOL = 0.01
V_MAX_TOL = 0.005
VI_REL_TOL = 0.01


@dataclass
class GoldenReport:
    policy_condition_numbers: Dict[str, float]
    v_max: float
    vi_max_condition_number: float
    vi_argmax_iteration: int
    vi_trace: np.ndarray = field(repr=False)
    vi_envelope: Tuple[float, float] = (float("nan"), float("nan"))
    deviations: List[str] = field(default_factory=list)

    def rows(self) -> List[Tuple[str, float, float]]:
        """(quantity, computed, reference) triples for tabulation."""
        out = [(f"cond Q^pi, pi={key}", value, reference)
               for (key, value), reference in zip(self.policy_condition_numbers.items(),
                                                   TOY_GOLDEN["policy_condition_numbers"])]
        out.append(("V_max", self.v_max, TOY_GOLDEN["v_max"]))
        out.append(("max cond F(V) along VI", self.vi_max_condition_number, TOY_GOLDEN["vi_max_condition_number"]))
        out.append(("  envelope low (rounded start)", self.vi_envelope[0], TOY_GOLDEN["vi_max_condition_number"]))
        out.append(("  envelope high (rounded start)", self.vi_envelope[1], TOY_GOLDEN["vi_max_condition_number"]))
        return out


def lookahead_conditions(mdp: TabularMdp, values: np.ndarray) -> np.ndarray:
    """cond(F(V)) for each row V of ``values``, batched."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    lookahead = mdp.mean_rewards[None] + mdp.gamma * np.einsum("sat,nt->nsa", mdp.transitions, values)
    sigma = np.linalg.svd(lookahead, compute_uv=False)
    smallest = sigma[:, -1]
    out = np.full(values.shape[0], np.inf)
    np.divide(sigma[:, 0], smallest, out=out, where=smallest > 0)
    return out


def vi_condition_trace(mdp: TabularMdp, initial_values: Sequence[float], tol: float = 1e-10) -> np.ndarray:
    """cond(F(V⁽ᵗ⁾)) along value iteration from ``initial_values`` until convergence."""
    return lookahead_conditions(mdp, value_iteration(mdp, np.asarray(initial_values, dtype=float), tol=tol))


def rounding_envelope(mdp: TabularMdp, center: Sequence[float], half_width: float = 0.005,
                      resolution: int = 21) -> Tuple[float, float]:
    """Range of the VI maximum condition number over starts in a box around ``center``."""
    axes = [np.linspace(c - half_width, c + half_width, resolution) for c in center]
    maxima = [float(vi_condition_trace(mdp, start).max()) for start in itertools.product(*axes)]
    return min(maxima), max(maxima)


def run_golden(mdp: Optional[TabularMdp] = None, envelope: bool = True) -> GoldenReport:
    mdp = mdp or load_toy_mdp()
    conds = {}
    for actions in itertools.product(range(mdp.n_actions), repeat=mdp.n_states):
        q = exact_policy_q(mdp, np.array(actions))
        conds[",".join(map(str, actions))] = condition_number(q)

    trace = vi_condition_trace(mdp, TOY_GOLDEN["vi_initial_values"])
    report = GoldenReport(
        policy_condition_numbers=conds,
        v_max=mdp.v_max,
        vi_max_condition_number=float(trace.max()),
        vi_argmax_iteration=int(np.argmax(trace)),
        vi_trace=trace,
    )
    if envelope:
        report.vi_envelope = rounding_envelope(mdp, TOY_GOLDEN["vi_initial_values"])

    for (key, value), reference in zip(conds.items(), TOY_GOLDEN["policy_condition_numbers"]):
        if abs(value - reference) > POLICY_TOL:
            report.deviations.append(f"cond(Q^pi) for pi=({key}) is {value:.4f}, reference {reference}")
    if abs(report.v_max - TOY_GOLDEN["v_max"]) > V_MAX_TOL:
        report.deviations.append(f"V_max is {report.v_max:.4f}, reference {TOY_GOLDEN['v_max']}")
    expected_vi = TOY_GOLDEN["vi_max_condition_number"]
    if abs(report.vi_max_condition_number - expected_vi) > VI_REL_TOL * expected_vi:
        lo, hi = report.vi_envelope
        inside = lo <= expected_vi <= hi
        report.deviations.append(
            f"VI max cond is {report.vi_max_condition_number:.2f} at t={report.vi_argmax_iteration}, "
            f"reference {expected_vi}; rounding envelope [{lo:.2f}, {hi:.2f}] "
            f"{'contains' if inside else 'excludes'} it")
    for message in report.deviations:
        logger.warning(message)
    return report


def run_single(config: ExperimentConfig, out_dir: Path) -> List[ExperimentRecord]:
    report = run_golden()
    records = [
        ExperimentRecord(experiment=config.experiment_id, evaluator=f"policy_{key.replace(',', '')}", seed=0,
                         budget=0, condition_number=value)
        for key, value in report.policy_condition_numbers.items()
    ]
    vi_warning = next((d for d in report.deviations if d.startswith("VI")), "")
    for t, value in enumerate(report.vi_trace):
        records.append(ExperimentRecord(
            experiment=config.experiment_id, evaluator="value_iteration", seed=0, budget=0, epoch=t,
            condition_number=float(value),
            warnings=vi_warning if t == report.vi_argmax_iteration else "",
        ))
    return records
