"""Matrix evaluators sharing one call signature: the leveraged estimator and its baselines."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.agents.lme_estimator import (
    AnchorPlan,
    EstimatorSettings,
    LmeReport,
    build_plan,
    error_metrics,
    lme,
    make_anchor_plan,
    phase2_complete,
    sample_anchors,
    search_min_budget,
    threshold_beta,
)
from src.core.errors import BudgetTooSmallError
from src.tools.linalg_core import LeverageProfile, leverage_scores_exact, numeric_rank, svd, threshold_truncate
from src.tools.oracles import BudgetLedger, EntryOracle

logger = logging.getLogger(__name__)


@dataclass
class EvaluationRequest:
    """Everything an evaluator needs for one matrix estimate."""
    oracle: EntryOracle
    budget: int
    delta: float
    gamma: float
    r_max: float
    rng: np.random.Generator
    settings: EstimatorSettings = field(default_factory=EstimatorSettings)
    truth: Optional[np.ndarray] = None


Evaluator = Callable[[EvaluationRequest], Tuple[np.ndarray, LmeReport]]


def _finish(q_hat: np.ndarray, report: LmeReport, request: EvaluationRequest) -> Tuple[np.ndarray, LmeReport]:
    if request.truth is not None:
        report.update(error_metrics(q_hat, request.truth))
    return q_hat, report


# --- Leveraged ---
def lme_leveraged(request: EvaluationRequest) -> Tuple[np.ndarray, LmeReport]:
    return lme(request.oracle, request.budget, request.delta, request.gamma, request.r_max, request.rng,
               request.settings, request.truth)


# --- CUR baselines ---
def _cur_with_profile(request: EvaluationRequest, profile: LeverageProfile, mode: str, weighted: bool,
                      rank_cap: Optional[int], label: str) -> Tuple[np.ndarray, LmeReport]:
    """Spends the whole budget on an anchor cross chosen from ``profile``."""
    cfg = request.settings
    oracle = request.oracle
    anchor_rng, sample_rng = request.rng.spawn(2)
    plan = build_plan(oracle, request.budget, request.delta, request.gamma, request.r_max,
                      d_hat=cfg.rank or profile.rank_used, n_anchors=cfg.n_anchors, with_phase1=False)
    rows, cols = sample_anchors(profile, plan.n_anchors, anchor_rng, mode, cfg.max_anchor_redraws)
    anchors = make_anchor_plan(profile, rows, cols, plan.n_anchors, oracle.shape)
    if not weighted:
        anchors = AnchorPlan(anchors.rows, anchors.cols, np.ones(anchors.rows.size), np.ones(anchors.cols.size),
                             anchors.shape)
    ledger = BudgetLedger(request.budget)
    result = phase2_complete(oracle, plan, anchors, sample_rng, rank_cap=rank_cap, pinv_rtol=cfg.pinv_rtol,
                             ledger=ledger)
    warnings = list(plan.warnings)
    if result.rank_deficient:
        warnings.append(f"anchor_rank_deficient: core rank {result.core_rank} < {rank_cap}")
    report: LmeReport = {
        "budget": request.budget,
        "consumed": ledger.consumed,
        "consumed_phase1": 0,
        "consumed_phase2": ledger.consumed,
        "tau": plan.tau,
        "n_phase1": 0,
        "beta": None,
        "d_hat": rank_cap,
        "n_anchors": plan.n_anchors,
        "n_anchor_rows": int(anchors.rows.size),
        "n_anchor_cols": int(anchors.cols.size),
        "n_square": result.n_square,
        "n_plus": result.n_plus,
        "anchor_mode": label,
        "anchor_rows": anchors.rows.tolist(),
        "anchor_cols": anchors.cols.tolist(),
        "core_rank": result.core_rank,
        "warnings": warnings,
    }
    return _finish(result.q_hat, report, request)


def cur_uniform_anchors(request: EvaluationRequest) -> Tuple[np.ndarray, LmeReport]:
    """Uniform anchors without replacement, unit weights, no leverage phase."""
    s, a = request.oracle.shape
    profile = LeverageProfile.uniform(s, a, rank_used=request.settings.rank or 1)
    return _cur_with_profile(request, profile, "uniform", weighted=False, rank_cap=request.settings.rank,
                             label="uniform")


def cur_oracle_anchors(request: EvaluationRequest) -> Tuple[np.ndarray, LmeReport]:
    """Anchors and weights from the exact leverage scores of the target matrix."""
    truth = request.truth if request.truth is not None else request.oracle.target()
    d = request.settings.rank or numeric_rank(truth, request.settings.rank_tol)
    profile = leverage_scores_exact(truth, d, request.settings.rank_tol)
    mode = request.settings.anchor_mode if request.settings.anchor_mode != "uniform" else "bernoulli"
    return _cur_with_profile(request, profile, mode, weighted=True, rank_cap=d, label=f"oracle_{mode}")


# --- Full-matrix baselines ---
def _full_matrix_sample(request: EvaluationRequest, ledger: BudgetLedger) -> Tuple[np.ndarray, int, int]:
    oracle = request.oracle
    s, a = oracle.shape
    tau = oracle.horizon(request.budget, request.gamma)
    per_entry = request.budget // (oracle.cost_per_sample(tau) * s * a)
    if per_entry < 1:
        def feasible(budget: int) -> bool:
            t = oracle.horizon(budget, request.gamma)
            return budget // (oracle.cost_per_sample(t) * s * a) >= 1
        raise BudgetTooSmallError(request.budget, search_min_budget(feasible, request.budget),
                                  "fewer than one sample per matrix entry")
    rows, cols = np.divmod(np.arange(s * a), a)
    counts = np.full(s * a, per_entry, dtype=np.int64)
    sums = oracle.sample_sums(rows, cols, counts, request.rng, tau, ledger, label="full_matrix")
    return sums.reshape(s, a) / per_entry, tau, per_entry


def _full_report(request: EvaluationRequest, ledger: BudgetLedger, tau: int, per_entry: int, label: str,
                 beta: Optional[float] = None, d_hat: Optional[int] = None) -> LmeReport:
    return {
        "budget": request.budget,
        "consumed": ledger.consumed,
        "consumed_phase1": 0,
        "consumed_phase2": ledger.consumed,
        "tau": tau,
        "n_phase1": 0,
        "beta": beta,
        "d_hat": d_hat,
        "n_square": per_entry,
        "n_plus": per_entry,
        "anchor_mode": label,
        "warnings": [],
    }


def full_matrix_mc(request: EvaluationRequest) -> Tuple[np.ndarray, LmeReport]:
    """Every entry sampled ⌊T/((τ+1)·S·A)⌋ times."""
    ledger = BudgetLedger(request.budget)
    q_hat, tau, per_entry = _full_matrix_sample(request, ledger)
    return _finish(q_hat, _full_report(request, ledger, tau, per_entry, "full"), request)


def svd_denoise(request: EvaluationRequest) -> Tuple[np.ndarray, LmeReport]:
    """Full-matrix sampling followed by a rank-d truncated SVD.

    d is ``settings.rank`` when set, otherwise the number of singular values
    above the threshold formula (at least one).
    """
    ledger = BudgetLedger(request.budget)
    q_tilde, tau, per_entry = _full_matrix_sample(request, ledger)
    s, a = request.oracle.shape
    dec = svd(q_tilde)
    beta = None
    d = request.settings.rank
    if d is None:
        beta = request.settings.beta
        if beta is None:
            beta = threshold_beta(s, a, request.budget, request.gamma, request.r_max, request.delta,
                                  request.settings.beta_scale)
        d = max(1, threshold_truncate(dec, beta).d_hat)
    d = min(d, dec.singular_values.size)
    q_hat = (dec.left_vectors[:, :d] * dec.singular_values[:d]) @ dec.right_vectors[:, :d].T
    return _finish(q_hat, _full_report(request, ledger, tau, per_entry, "svd", beta, d), request)


def exact(request: EvaluationRequest) -> Tuple[np.ndarray, LmeReport]:
    """Returns the oracle's target matrix at zero cost."""
    q_hat = np.array(request.oracle.target(), dtype=float)
    report: LmeReport = {"budget": request.budget, "consumed": 0, "consumed_phase1": 0, "consumed_phase2": 0,
                         "tau": 0, "n_phase1": 0, "beta": None, "d_hat": None, "anchor_mode": "exact",
                         "warnings": []}
    return _finish(q_hat, report, request)


EVALUATORS: Dict[str, Evaluator] = {
    "lme_leveraged": lme_leveraged,
    "cur_uniform_anchors": cur_uniform_anchors,
    "cur_oracle_anchors": cur_oracle_anchors,
    "full_matrix_mc": full_matrix_mc,
    "svd_denoise": svd_denoise,
    "exact": exact,
}


def get_evaluator(name: str) -> Evaluator:
    try:
        return EVALUATORS[name]
    except KeyError:
        raise ValueError(f"Unknown evaluator '{name}'. Available: {sorted(EVALUATORS)}") from None
