"""Seeded generators for low-rank MDPs and low-rank matrices."""
import logging
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.tools.mdp import RewardNoise, TabularMdp, check_policy

logger = logging.getLogger(__name__)


# --- Specifications ---
class GeneratorSpec(BaseModel):
    """Parameters of a synthetic MDP whose value matrices have rank ≤ ``rank``.

    States and actions carry latent types: ``F`` (S×d) and ``G`` (A×d) are
    Dirichlet(``type_concentration``) rows. Transitions mix ``d`` base
    distributions drawn from Dirichlet(``base_concentration``) over states.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_states: int = Field(gt=0)
    n_actions: int = Field(gt=0)
    rank: int = Field(gt=0)
    gamma: float = Field(gt=0.0, lt=1.0)
    r_max: float = Field(default=1.0, gt=0.0)
    type_concentration: float = Field(default=0.3, gt=0.0)
    base_concentration: float = Field(default=1.0, gt=0.0)
    approx_noise: float = Field(default=0.0, ge=0.0, le=1.0)
    reward_noise: Literal["none", "gaussian", "bounded_uniform"] = "none"
    reward_noise_scale: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _rank_fits(self):
        if self.rank > min(self.n_states, self.n_actions):
            raise ValueError(f"rank={self.rank} exceeds min(S, A)={min(self.n_states, self.n_actions)}")
        return self


class MatrixSpec(BaseModel):
    """Parameters of a random rank-d matrix for the matrix-completion runs.

    With ``coherence="spiky"`` a ``spike_fraction`` of the rows and columns of
    the factors is multiplied by ``spike_scale``, which concentrates leverage
    on those rows and columns.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_rows: int = Field(gt=0)
    n_cols: int = Field(gt=0)
    rank: int = Field(gt=0)
    scale: float = Field(default=1.0, gt=0.0)
    coherence: Literal["none", "spiky"] = "none"
    spike_fraction: float = Field(default=0.02, gt=0.0, le=1.0)
    spike_scale: float = Field(default=10.0, ge=1.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _rank_fits(self):
        if self.rank > min(self.n_rows, self.n_cols):
            raise ValueError(f"rank={self.rank} exceeds min(n_rows, n_cols)={min(self.n_rows, self.n_cols)}")
        return self


# --- Generators ---
def generate_lowrank_mdp(spec: GeneratorSpec, rng: Optional[np.random.Generator] = None) -> TabularMdp:
    """Builds a TabularMdp with rank-≤d rewards and (SA)×S transition matrix.

    p(·|s,a) = Σ_{i,j} F[s,i] G[a,j] Σ_k B[i,j,k] q_k and r = F R Gᵀ, so
    Q^π = F (R + γC_π) Gᵀ has rank ≤ d for every policy π. Rewards and
    transitions share the same state and action types; independent weights
    per (s, a) would leave Q^π full rank.

    ``approx_noise`` = ζ adds uniform noise of entrywise magnitude ζ to the
    rewards once they are at scale ``r_max`` (rescaled again afterwards), and
    mixes a weight ζ of full-rank Dirichlet rows into the transitions.
    """
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    s, a, d = spec.n_states, spec.n_actions, spec.rank

    f = rng.dirichlet(np.full(d, spec.type_concentration), size=s)
    g = rng.dirichlet(np.full(d, spec.type_concentration), size=a)
    mixing = rng.dirichlet(np.ones(d), size=(d, d))
    bases = rng.dirichlet(np.full(s, spec.base_concentration), size=d)

    pair_types = np.einsum("si,aj->saij", f, g).reshape(s * a, d * d)
    flat = pair_types @ mixing.reshape(d * d, d) @ bases
    core = rng.standard_normal((d, d))
    rewards = _rescaled(f @ core @ g.T, spec.r_max)

    if spec.approx_noise > 0:
        zeta = spec.approx_noise
        rewards = _rescaled(rewards + zeta * rng.uniform(-1.0, 1.0, size=rewards.shape), spec.r_max)
        flat = (1.0 - zeta) * flat + zeta * rng.dirichlet(np.ones(s), size=s * a)

    flat = flat / flat.sum(axis=1, keepdims=True)

    logger.debug(f"Generated low-rank MDP S={s} A={a} d={d} zeta={spec.approx_noise} seed={spec.seed}")
    return TabularMdp(
        transitions=flat.reshape(s, a, s),
        mean_rewards=rewards,
        gamma=spec.gamma,
        r_max=spec.r_max,
        reward_noise=RewardNoise(spec.reward_noise, spec.reward_noise_scale),
    )


def _rescaled(rewards: np.ndarray, r_max: float) -> np.ndarray:
    peak = np.max(np.abs(rewards))
    return rewards * (r_max / peak) if peak > 0 else rewards


def generate_lowrank_matrix(spec: MatrixSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Gaussian-factor rank-d matrix rescaled to ``‖M‖_∞ = spec.scale``."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    left = rng.standard_normal((spec.n_rows, spec.rank))
    right = rng.standard_normal((spec.n_cols, spec.rank))
    if spec.coherence == "spiky":
        for factor in (left, right):
            n_spiky = max(1, int(np.ceil(spec.spike_fraction * factor.shape[0])))
            spiky = rng.choice(factor.shape[0], size=n_spiky, replace=False)
            factor[spiky] *= spec.spike_scale
    m = left @ right.T
    return m * (spec.scale / np.max(np.abs(m)))


def mdp_with_policy_q(target: np.ndarray, gamma: float, policy: Sequence[int],
                      next_state_dist: Optional[np.ndarray] = None) -> TabularMdp:
    """An MDP whose value matrix under ``policy`` is exactly ``target``.

    Every (s, a) moves to a common distribution μ (uniform by default), so
    Q^π = r + γ μᵀm_π with m_π(s) = target[s, π(s)]; choosing
    r = target − γ μᵀm_π makes Q^π = target.
    """
    target = np.asarray(target, dtype=float)
    n_states, n_actions = target.shape
    mu = np.full(n_states, 1.0 / n_states) if next_state_dist is None else np.asarray(next_state_dist, dtype=float)
    transitions = np.broadcast_to(mu, (n_states, n_actions, n_states)).copy()
    placeholder = TabularMdp(transitions, np.zeros_like(target), gamma, 1.0)
    pol = check_policy(placeholder, policy)
    continuation = gamma * float(mu @ target[np.arange(n_states), pol])
    rewards = target - continuation
    r_max = max(float(np.max(np.abs(rewards))), np.finfo(float).tiny)
    return TabularMdp(transitions, rewards, gamma, r_max)
