# -*- coding: utf-8 -*-
"""Leveraged matrix estimation: spectral leverage estimation followed by
leverage-weighted CUR completion over any :class:`EntryOracle`."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict, Field
from typing_extensions import TypedDict

from src.core.config import LME_DEFAULTS
from src.core.errors import AnchorSelectionError, BudgetTooSmallError
from src.tools.linalg_core import (
    LeverageProfile,
    as_dense,
    numeric_rank,
    pseudo_inverse,
    row_leverage,
    svd,
    threshold_truncate,
    top_k_indices,
)
from src.tools.oracles import BudgetLedger, EntryOracle

logger = logging.getLogger(__name__)

AnchorMode = Literal["bernoulli", "fixed_k", "top_k", "uniform"]


# --- Settings ---
class EstimatorSettings(BaseModel):
    """Tunable knobs of the estimator; defaults come from ``LME_DEFAULTS``."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    beta_scale: float = Field(default=LME_DEFAULTS["beta_scale"], gt=0.0)
    beta: Optional[float] = Field(default=LME_DEFAULTS["beta"], ge=0.0)
    anchor_mode: AnchorMode = LME_DEFAULTS["anchor_mode"]
    n_anchors: Optional[int] = Field(default=LME_DEFAULTS["n_anchors"], ge=1)
    pinv_rtol: float = Field(default=LME_DEFAULTS["pinv_rtol"], gt=0.0)
    max_anchor_redraws: int = Field(default=LME_DEFAULTS["max_anchor_redraws"], ge=1)
    rank_tol: Optional[float] = Field(default=LME_DEFAULTS["rank_tol"], ge=0.0)
    rank: Optional[int] = Field(default=LME_DEFAULTS["rank"], ge=1)


# --- Data Structures ---
@dataclass(frozen=True)
class SamplingPlan:
    """Budget split for one estimation run.

    ``skeleton_budget`` is the share spent on anchor rows and columns: T/2
    after a leverage phase, all of T when anchors are chosen without one.
    """
    budget: int
    tau: int
    eps_trunc: float
    cost_per_sample: int
    n_phase1: int
    n_anchors: int
    n_square: int
    n_plus: int
    skeleton_budget: int
    gamma: float
    r_max: float
    delta: float
    warnings: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Phase1Result:
    q_tilde: np.ndarray
    beta: float
    d_hat: int
    u_hat: np.ndarray
    w_hat: np.ndarray
    profile: LeverageProfile
    singular_values: np.ndarray = field(repr=False)
    rank_fallback: bool = False


@dataclass(frozen=True)
class AnchorPlan:
    """Anchor rows ``I``, columns ``J`` and their diagonal weights ``L``, ``R``."""
    rows: np.ndarray
    cols: np.ndarray
    row_weights: np.ndarray
    col_weights: np.ndarray
    shape: Tuple[int, int]

    @property
    def omega_square(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[np.ix_(self.rows, self.cols)] = True
        return mask

    @property
    def omega_plus(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.rows, :] = True
        mask[:, self.cols] = True
        return mask & ~self.omega_square

    @property
    def n_square(self) -> int:
        return self.rows.size * self.cols.size

    @property
    def n_plus(self) -> int:
        s, a = self.shape
        return self.rows.size * a + self.cols.size * s - 2 * self.n_square


@dataclass(frozen=True)
class Phase2Result:
    q_hat: np.ndarray
    n_square: int
    n_plus: int
    core_rank: int
    rank_cap: Optional[int]
    rank_deficient: bool


class LmeReport(TypedDict, total=False):
    budget: int
    consumed: int
    consumed_phase1: int
    consumed_phase2: int
    tau: int
    n_phase1: int
    beta: Optional[float]
    d_hat: Optional[int]
    n_anchors: int
    n_anchor_rows: int
    n_anchor_cols: int
    n_square: int
    n_plus: int
    anchor_mode: str
    anchor_rows: List[int]
    anchor_cols: List[int]
    core_rank: int
    warnings: List[str]
    entrywise_error: float
    frobenius_error: float


# --- Plan formulas ---
def threshold_beta(n_rows: int, n_cols: int, budget: int, gamma: float, r_max: float, delta: float,
                   beta_scale: float = 1.0) -> float:
    """Singular-value threshold separating signal from sampling noise.

    β = √(r²·S·A·(S+A)/((1−γ)³T) · log⁴((S+A)T/((1−γ)δ))) + r·√(SA)/T, times ``beta_scale``.
    """
    s, a = n_rows, n_cols
    horizon = 1.0 - gamma
    log_term = math.log((s + a) * budget / (horizon * delta)) ** 4
    spread = r_max ** 2 * s * a * (s + a) / (horizon ** 3 * budget) * log_term
    return beta_scale * (math.sqrt(spread) + r_max * math.sqrt(s * a) / budget)


def anchor_count(d_hat: int, delta: float) -> int:
    """K = ⌈64·d·log(64·d/δ)⌉ before clamping."""
    return math.ceil(64 * d_hat * math.log(64 * d_hat / delta))


def skeleton_counts(skeleton_budget: int, cost_per_sample: int, n_anchor_rows: int, n_anchor_cols: int,
                    n_rows: int, n_cols: int) -> Tuple[int, int]:
    """Per-entry sample counts (N1 on I×J, N2 on the rest of the anchor cross).

    Each of the two regions receives half of ``skeleton_budget``; N2 is capped
    at N1 and equals N1 when the cross has no off-core entries.
    """
    size_square = n_anchor_rows * n_anchor_cols
    size_plus = n_anchor_rows * n_cols + n_anchor_cols * n_rows - 2 * size_square
    if size_square == 0:
        return 0, 0
    n_square = skeleton_budget // (2 * cost_per_sample * size_square)
    if size_plus <= 0:
        return n_square, n_square
    n_plus = min(n_square, skeleton_budget // (2 * cost_per_sample * size_plus))
    return n_square, n_plus


def _check_inputs(budget: int, delta: float, gamma: float, r_max: float):
    if budget < 1:
        raise ValueError(f"budget must be positive, got {budget}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    if r_max <= 0:
        raise ValueError(f"r_max must be positive, got {r_max}")


def _plan_fields(oracle: EntryOracle, budget: int, delta: float, gamma: float, d_hat: Optional[int],
                 n_anchors: Optional[int], with_phase1: bool):
    s, a = oracle.shape
    tau = oracle.horizon(budget, gamma)
    cost = oracle.cost_per_sample(tau)
    n_phase1 = budget // (2 * cost) if with_phase1 else 0
    requested = n_anchors if n_anchors is not None else anchor_count(d_hat or 1, delta)
    k = min(requested, s, a)
    skeleton_budget = budget // 2 if with_phase1 else budget
    n_square, n_plus = skeleton_counts(skeleton_budget, cost, k, k, s, a)
    return tau, cost, n_phase1, requested, k, skeleton_budget, n_square, n_plus


def _infeasibility(oracle: EntryOracle, n_phase1: int, n_plus: int, with_phase1: bool) -> Optional[str]:
    s, a = oracle.shape
    if with_phase1 and n_phase1 < s * a:
        return f"phase-1 trajectories {n_phase1} < S·A = {s * a}"
    if n_plus < 1:
        return "fewer than one sample per anchor entry"
    return None


def search_min_budget(feasible: Callable[[int], bool], start: int = 1) -> int:
    """Smallest T with ``feasible(T)``, by doubling then bisection."""
    hi = max(1, start)
    while not feasible(hi):
        hi *= 2
        if hi > 1 << 62:
            raise OverflowError("no feasible budget below 2^62")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def minimal_feasible_budget(oracle: EntryOracle, delta: float, gamma: float, d_hat: Optional[int] = None,
                            n_anchors: Optional[int] = None, with_phase1: bool = True) -> int:
    def feasible(budget: int) -> bool:
        _, _, n_phase1, _, _, _, _, n_plus = _plan_fields(oracle, budget, delta, gamma, d_hat, n_anchors, with_phase1)
        return _infeasibility(oracle, n_phase1, n_plus, with_phase1) is None

    return search_min_budget(feasible)


def build_plan(oracle: EntryOracle, budget: int, delta: float, gamma: float, r_max: float,
               d_hat: Optional[int] = None, n_anchors: Optional[int] = None, with_phase1: bool = True) -> SamplingPlan:
    """Sampling plan for budget T.

    Args:
        oracle: entry oracle; its kind decides τ (rollout) or τ = 0 (direct).
        budget: total budget T in single transitions.
        delta: confidence level.
        gamma: discount factor (0 for direct oracles).
        r_max: bound on observation magnitude.
        d_hat: estimated rank for the anchor-count formula; 1 when not yet known.
        n_anchors: explicit K, overriding the formula.
        with_phase1: whether half of T is reserved for leverage estimation.

    Raises:
        BudgetTooSmallError: with the minimal feasible T.
    """
    _check_inputs(budget, delta, gamma, r_max)
    tau, cost, n_phase1, requested, k, skeleton_budget, n_square, n_plus = _plan_fields(
        oracle, budget, delta, gamma, d_hat, n_anchors, with_phase1)

    reason = _infeasibility(oracle, n_phase1, n_plus, with_phase1)
    if reason is not None:
        minimal = minimal_feasible_budget(oracle, delta, gamma, d_hat, n_anchors, with_phase1)
        raise BudgetTooSmallError(budget, minimal, reason)

    warnings = []
    if requested > k:
        message = f"anchor count {requested} clamped to min(S, A) = {k}"
        logger.warning(message)
        warnings.append(message)
    return SamplingPlan(
        budget=budget, tau=tau, eps_trunc=r_max / budget, cost_per_sample=cost, n_phase1=n_phase1,
        n_anchors=k, n_square=n_square, n_plus=n_plus, skeleton_budget=skeleton_budget,
        gamma=gamma, r_max=r_max, delta=delta, warnings=tuple(warnings),
    )


# --- Phase 1: leverage estimation ---
def estimated_profile(u_hat: np.ndarray, w_hat: np.ndarray, d_hat: int) -> LeverageProfile:
    """ℓ̃_s = max(‖Û_s‖², d̂/S), normalized; same for columns."""
    raw_left = np.maximum(row_leverage(u_hat), d_hat / u_hat.shape[0])
    raw_right = np.maximum(row_leverage(w_hat), d_hat / w_hat.shape[0])
    return LeverageProfile(raw_left / raw_left.sum(), raw_right / raw_right.sum(), d_hat, "estimated",
                           raw_left=raw_left, raw_right=raw_right)


def phase1_estimate(oracle: EntryOracle, plan: SamplingPlan, rng: np.random.Generator,
                    beta_scale: float = 1.0, beta: Optional[float] = None, rank: Optional[int] = None,
                    ledger: Optional[BudgetLedger] = None) -> Phase1Result:
    """Uniform-start sampling, empirical truncated matrix, thresholded SVD, leverage scores.

    ``beta`` overrides the threshold formula when given. Without ``beta``, a
    known ``rank`` fixes d̂ and the reported threshold is σ_d̂.
    """
    s, a = oracle.shape
    n = plan.n_phase1
    # N uniform start pairs, collapsed to a count per entry (zero-count entries stay 0 in Q̃)
    counts = rng.multinomial(n, np.full(s * a, 1.0 / (s * a)))
    rows, cols = np.divmod(np.arange(s * a), a)
    sums = oracle.sample_sums(rows, cols, counts, rng, plan.tau, ledger, label="phase1")
    q_tilde = (s * a / n) * sums.reshape(s, a)

    dec = svd(q_tilde)
    if beta is None and rank is not None:
        d_hat = min(int(rank), dec.singular_values.size)
        return Phase1Result(
            q_tilde=q_tilde, beta=float(dec.singular_values[d_hat - 1]), d_hat=d_hat,
            u_hat=dec.left_vectors[:, :d_hat], w_hat=dec.right_vectors[:, :d_hat],
            profile=estimated_profile(dec.left_vectors[:, :d_hat], dec.right_vectors[:, :d_hat], d_hat),
            singular_values=dec.singular_values,
        )
    if beta is None:
        beta = threshold_beta(s, a, plan.budget, plan.gamma, plan.r_max, plan.delta, beta_scale)
    cut = threshold_truncate(dec, beta)
    d_hat, u_hat, w_hat = cut.d_hat, cut.u_hat, cut.w_hat
    fallback = cut.empty
    if fallback:
        logger.warning(f"No singular value reaches beta={beta:.4g} (sigma_1={dec.singular_values[0]:.4g}); "
                       f"keeping the top component")
        d_hat = 1
        u_hat = dec.left_vectors[:, :1]
        w_hat = dec.right_vectors[:, :1]

    return Phase1Result(
        q_tilde=q_tilde, beta=float(beta), d_hat=d_hat, u_hat=u_hat, w_hat=w_hat,
        profile=estimated_profile(u_hat, w_hat, d_hat), singular_values=dec.singular_values,
        rank_fallback=fallback,
    )


# --- Phase 2: anchors and CUR completion ---
def _draw_side(scores: np.ndarray, k: int, rng: np.random.Generator, mode: AnchorMode, max_redraws: int,
               side: str) -> np.ndarray:
    n = scores.size
    if mode == "bernoulli":
        inclusion = np.minimum(1.0, k * scores)
        # Independent coin per index, so an empty draw is possible when K·ℓ̂ is small everywhere
        for _ in range(max_redraws):
            chosen = np.flatnonzero(rng.random(n) < inclusion)
            if chosen.size:
                return chosen
            logger.warning(f"Empty {side} anchor set drawn; redrawing")
        raise AnchorSelectionError(f"{side} anchor set stayed empty after {max_redraws} draws")
    if mode == "fixed_k":
        support = int(np.count_nonzero(scores))
        if support == 0:
            raise AnchorSelectionError(f"all {side} leverage scores are zero")
        return np.sort(rng.choice(n, size=min(k, support), replace=False, p=scores / scores.sum()))
    if mode == "top_k":
        return top_k_indices(scores, min(k, n))
    if mode == "uniform":
        return np.sort(rng.choice(n, size=min(k, n), replace=False))
    raise ValueError(f"Unknown anchor mode: {mode}")


def sample_anchors(profile: LeverageProfile, k: int, rng: np.random.Generator, mode: AnchorMode = "bernoulli",
                   max_redraws: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """Anchor rows and columns drawn from leverage scores.

    ``bernoulli`` includes index i with probability min(1, K·ℓ̂_i);
    ``fixed_k`` draws exactly min(K, support) indices without replacement with
    probabilities ℓ̂; ``top_k`` keeps the K largest scores; ``uniform`` ignores
    the scores.
    """
    if k < 1:
        raise ValueError(f"K must be at least 1, got {k}")
    rows = _draw_side(np.asarray(profile.left_scores, dtype=float), k, rng, mode, max_redraws, "row")
    cols = _draw_side(np.asarray(profile.right_scores, dtype=float), k, rng, mode, max_redraws, "column")
    return rows, cols


def anchor_weights(scores: np.ndarray, k: int) -> np.ndarray:
    """1/min(1, √(K·score)); indices with a zero score get weight 1."""
    scores = np.asarray(scores, dtype=float)
    weights = np.ones_like(scores)
    positive = scores > 0
    weights[positive] = 1.0 / np.minimum(1.0, np.sqrt(k * scores[positive]))
    return weights


def make_anchor_plan(profile: LeverageProfile, rows: np.ndarray, cols: np.ndarray, k: int,
                     shape: Tuple[int, int]) -> AnchorPlan:
    rows = np.unique(np.asarray(rows, dtype=np.int64))
    cols = np.unique(np.asarray(cols, dtype=np.int64))
    if rows.size == 0 or cols.size == 0:
        raise AnchorSelectionError("anchor rows and columns must be nonempty")
    return AnchorPlan(
        rows=rows,
        cols=cols,
        row_weights=anchor_weights(profile.left_scores[rows], k),
        col_weights=anchor_weights(profile.right_scores[cols], k),
        shape=shape,
    )


def weighted_cur(skeleton: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                 row_weights: Optional[np.ndarray] = None, col_weights: Optional[np.ndarray] = None,
                 rank_cap: Optional[int] = None, rtol: float = 1e-10) -> np.ndarray:
    """Q(s,J)·R·(L·Q(I,J)·R)†·L·Q(I,a) computed from the anchor cross of ``skeleton``.

    Only rows ``I`` and columns ``J`` of ``skeleton`` are read. With L = R = I
    this is plain CUR.
    """
    skeleton = as_dense(skeleton, "skeleton")
    left = np.ones(rows.size) if row_weights is None else np.asarray(row_weights, dtype=float)
    right = np.ones(cols.size) if col_weights is None else np.asarray(col_weights, dtype=float)
    c = skeleton[:, cols] * right
    r = left[:, None] * skeleton[rows, :]
    core = left[:, None] * skeleton[np.ix_(rows, cols)] * right
    return c @ pseudo_inverse(core, rank_cap=rank_cap, rtol=rtol) @ r


def phase2_complete(oracle: EntryOracle, plan: SamplingPlan, anchors: AnchorPlan, rng: np.random.Generator,
                    rank_cap: Optional[int] = None, pinv_rtol: float = 1e-10,
                    ledger: Optional[BudgetLedger] = None) -> Phase2Result:
    """Samples the anchor cross and fills the rest by weighted CUR.

    Per-entry counts are recomputed from the actual anchor sizes so that the
    skeleton spend never exceeds ``plan.skeleton_budget``. Anchor rows and
    columns keep their empirical means.

    Raises:
        BudgetTooSmallError: if the drawn anchors leave less than one sample per entry.
    """
    s, a = anchors.shape
    n_square, n_plus = skeleton_counts(plan.skeleton_budget, plan.cost_per_sample,
                                       anchors.rows.size, anchors.cols.size, s, a)
    if n_plus < 1:
        def feasible(budget: int) -> bool:
            share = budget // 2 if plan.n_phase1 else budget
            tau = oracle.horizon(budget, plan.gamma)
            return skeleton_counts(share, oracle.cost_per_sample(tau), anchors.rows.size, anchors.cols.size,
                                   s, a)[1] >= 1
        raise BudgetTooSmallError(plan.budget, search_min_budget(feasible, plan.budget),
                                  f"{anchors.rows.size}×{anchors.cols.size} anchors leave no sample per entry")

    # One flat request for the whole cross: core entries get N1 draws, the arms N2
    square, plus = anchors.omega_square, anchors.omega_plus
    entry_rows, entry_cols = np.nonzero(square | plus)
    counts = np.where(square[entry_rows, entry_cols], n_square, n_plus).astype(np.int64)
    sums = oracle.sample_sums(entry_rows, entry_cols, counts, rng, plan.tau, ledger, label="phase2")

    skeleton = np.zeros((s, a))
    skeleton[entry_rows, entry_cols] = sums / counts

    core = anchors.row_weights[:, None] * skeleton[np.ix_(anchors.rows, anchors.cols)] * anchors.col_weights
    core_dec = svd(core)
    core_rank = numeric_rank(core_dec, tol=pinv_rtol * float(core_dec.singular_values[0]))
    deficient = rank_cap is not None and core_rank < rank_cap
    if deficient:
        logger.warning(f"Anchor core has numeric rank {core_rank} < requested {rank_cap}")

    q_hat = weighted_cur(skeleton, anchors.rows, anchors.cols, anchors.row_weights, anchors.col_weights,
                         rank_cap=rank_cap, rtol=pinv_rtol)
    # Observed rows and columns are written back as-is, CUR only fills the interior
    q_hat[anchors.rows, :] = skeleton[anchors.rows, :]
    q_hat[:, anchors.cols] = skeleton[:, anchors.cols]
    return Phase2Result(q_hat=q_hat, n_square=n_square, n_plus=n_plus, core_rank=core_rank,
                        rank_cap=rank_cap, rank_deficient=deficient)


# --- Orchestration ---
class LeveragedMatrixEstimator:
    """Runs plan → leverage estimation → anchor sampling → CUR completion."""

    def __init__(self, settings: Optional[EstimatorSettings] = None, logger: Optional[logging.Logger] = None):
        self.settings = settings or EstimatorSettings()
        self.logger = logger or logging.getLogger(__name__)

    def estimate(self, oracle: EntryOracle, budget: int, delta: float, gamma: float, r_max: float,
                 rng: np.random.Generator, truth: Optional[np.ndarray] = None) -> Tuple[np.ndarray, LmeReport]:
        """Estimates the oracle's target matrix within budget T.

        Args:
            oracle: entry oracle.
            budget: total budget T; half goes to leverage estimation.
            delta: confidence level.
            gamma: discount factor of the rollouts (0 for direct oracles).
            r_max: bound on observation magnitude.
            rng: parent generator; three child streams are spawned from it.
            truth: optional ground truth for error metrics in the report.

        Returns:
            (Q̂, report)
        """
        cfg = self.settings
        phase1_rng, anchor_rng, phase2_rng = rng.spawn(3)
        ledger = BudgetLedger(budget)
        warnings: List[str] = []

        try:
            plan = build_plan(oracle, budget, delta, gamma, r_max, n_anchors=cfg.n_anchors)
            self.logger.debug(f"Plan T={budget} tau={plan.tau} N_phase1={plan.n_phase1}")

            # --- Phase 1 ---
            phase1 = phase1_estimate(oracle, plan, phase1_rng, cfg.beta_scale, cfg.beta, cfg.rank, ledger)
            if phase1.rank_fallback:
                warnings.append(f"rank_fallback: no singular value >= beta={phase1.beta:.4g}; d_hat set to 1")
            self.logger.info(f"Phase 1 done: beta={phase1.beta:.4g} d_hat={phase1.d_hat}")

            # --- Phase 2 ---
            plan = build_plan(oracle, budget, delta, gamma, r_max, d_hat=phase1.d_hat, n_anchors=cfg.n_anchors)
            warnings.extend(plan.warnings)
            rows, cols = sample_anchors(phase1.profile, plan.n_anchors, anchor_rng, cfg.anchor_mode,
                                        cfg.max_anchor_redraws)
            anchors = make_anchor_plan(phase1.profile, rows, cols, plan.n_anchors, oracle.shape)
            phase2 = phase2_complete(oracle, plan, anchors, phase2_rng, rank_cap=phase1.d_hat,
                                     pinv_rtol=cfg.pinv_rtol, ledger=ledger)
            if phase2.rank_deficient:
                warnings.append(f"anchor_rank_deficient: core rank {phase2.core_rank} < d_hat {phase1.d_hat}")
        except Exception as e:
            self.logger.error(f"Leveraged estimation failed at T={budget}: {e}", exc_info=True)
            raise

        report: LmeReport = {
            "budget": budget,
            "consumed": ledger.consumed,
            "consumed_phase1": ledger.by_label.get("phase1", 0),
            "consumed_phase2": ledger.by_label.get("phase2", 0),
            "tau": plan.tau,
            "n_phase1": plan.n_phase1,
            "beta": phase1.beta,
            "d_hat": phase1.d_hat,
            "n_anchors": plan.n_anchors,
            "n_anchor_rows": int(anchors.rows.size),
            "n_anchor_cols": int(anchors.cols.size),
            "n_square": phase2.n_square,
            "n_plus": phase2.n_plus,
            "anchor_mode": cfg.anchor_mode,
            "anchor_rows": anchors.rows.tolist(),
            "anchor_cols": anchors.cols.tolist(),
            "core_rank": phase2.core_rank,
            "warnings": warnings,
        }
        if truth is not None:
            report.update(error_metrics(phase2.q_hat, truth))
        self.logger.info(f"Estimate done: consumed {ledger.consumed}/{budget}, |I|={anchors.rows.size}, "
                         f"|J|={anchors.cols.size}")
        return phase2.q_hat, report


def lme(oracle: EntryOracle, budget: int, delta: float, gamma: float, r_max: float, rng: np.random.Generator,
        settings: Optional[EstimatorSettings] = None, truth: Optional[np.ndarray] = None) -> Tuple[np.ndarray, LmeReport]:
    return LeveragedMatrixEstimator(settings, logger).estimate(oracle, budget, delta, gamma, r_max, rng, truth)


# --- Reporting ---
def error_metrics(estimate: np.ndarray, truth: np.ndarray) -> dict:
    diff = np.asarray(estimate) - np.asarray(truth)
    return {"entrywise_error": float(np.max(np.abs(diff))), "frobenius_error": float(np.linalg.norm(diff))}


def report_to_json(report: LmeReport) -> bytes:
    return orjson.dumps(report, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_SORT_KEYS)
