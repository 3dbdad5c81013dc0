"""Tabular discounted MDPs: exact solvers, Bellman maps and a generative sampler."""
import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import orjson
import scipy.linalg

from src.core.errors import LmeError

logger = logging.getLogger(__name__)

MDP_FORMAT = "tabular-mdp/v1"
STOCHASTIC_TOL = 1e-9
# Rollouts are simulated in chunks of at most this many (trajectory, next-state) cells.
_ROLLOUT_CELLS = 1 << 22


# --- Data Structures ---
@dataclass(frozen=True)
class RewardNoise:
    """Additive reward noise.

    ``gaussian`` uses ``scale`` as the standard deviation; ``bounded_uniform``
    draws uniformly on ``[-scale/2, scale/2]`` (``scale`` is the width).
    """
    kind: Literal["none", "gaussian", "bounded_uniform"] = "none"
    scale: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "bounded_uniform"):
            raise ValueError(f"Unknown reward noise kind: {self.kind}")
        if self.scale < 0:
            raise ValueError(f"Reward noise scale must be non-negative, got {self.scale}")

    @property
    def bounded(self) -> bool:
        return self.kind != "gaussian" or self.scale == 0.0

    @property
    def half_width(self) -> float:
        return self.scale / 2.0 if self.kind == "bounded_uniform" else 0.0

    def draw(self, size: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "gaussian" and self.scale > 0:
            return rng.normal(0.0, self.scale, size)
        if self.kind == "bounded_uniform" and self.scale > 0:
            return rng.uniform(-self.scale / 2.0, self.scale / 2.0, size)
        return np.zeros(size)


@dataclass(frozen=True)
class TabularMdp:
    """Finite discounted MDP with ``transitions[s, a, s'] = p(s'|s, a)``."""
    transitions: np.ndarray
    mean_rewards: np.ndarray
    gamma: float
    r_max: float
    reward_noise: RewardNoise = field(default_factory=RewardNoise)
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = np.array(self.transitions, dtype=float)
        r = np.array(self.mean_rewards, dtype=float)
        if p.ndim != 3 or r.ndim != 2 or p.shape[:2] != r.shape or p.shape[2] != p.shape[0]:
            raise ValueError(f"Inconsistent shapes: transitions {p.shape}, rewards {r.shape}")
        if not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.r_max <= 0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")
        if np.any(p < 0) or not np.allclose(p.sum(axis=2), 1.0, atol=STOCHASTIC_TOL, rtol=0.0):
            raise ValueError("Every transition row must be a probability distribution")
        if np.max(np.abs(r)) > self.r_max * (1 + 1e-12):
            raise ValueError(f"|r(s,a)| exceeds r_max={self.r_max}")
        cdf = np.cumsum(p, axis=2)
        for arr in (p, r, cdf):
            arr.setflags(write=False)
        object.__setattr__(self, "transitions", p)
        object.__setattr__(self, "mean_rewards", r)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_states, self.n_actions

    @property
    def v_max(self) -> float:
        return self.r_max / (1.0 - self.gamma)

    def next_states(self, states: np.ndarray, actions: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Inverse-CDF draw of s' ~ p(·|s, a) for each pair."""
        u = rng.random(states.shape[0])
        nxt = np.sum(u[:, None] >= self._cdf[states, actions], axis=1)
        return np.minimum(nxt, self.n_states - 1)


# --- Policies ---
def check_policy(mdp: TabularMdp, policy: Sequence[int]) -> np.ndarray:
    pol = np.asarray(policy)
    if pol.shape != (mdp.n_states,) or not np.issubdtype(pol.dtype, np.integer):
        raise ValueError(f"Policy must be an integer vector of length {mdp.n_states}, got {pol.shape} {pol.dtype}")
    if np.any(pol < 0) or np.any(pol >= mdp.n_actions):
        raise ValueError(f"Policy actions must lie in [0, {mdp.n_actions})")
    return pol.astype(np.int64)


def random_policy(n_states: int, n_actions: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, n_actions, size=n_states, dtype=np.int64)


def greedy_policy(q: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ``np.argmax`` returns the lowest index on ties."""
    return np.argmax(np.asarray(q), axis=1).astype(np.int64)


# --- Exact evaluation and Bellman maps ---
def policy_value(mdp: TabularMdp, policy: Sequence[int]) -> np.ndarray:
    """Solves (I − γP_π)V = r_π directly."""
    pol = check_policy(mdp, policy)
    states = np.arange(mdp.n_states)
    p_pi = mdp.transitions[states, pol, :]
    r_pi = mdp.mean_rewards[states, pol]
    system = np.eye(mdp.n_states) - mdp.gamma * p_pi
    try:
        return scipy.linalg.solve(system, r_pi)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
        raise LmeError(f"Policy evaluation system is singular: {e}") from e


def f_operator(mdp: TabularMdp, values: np.ndarray) -> np.ndarray:
    """F(V)(s,a) = r(s,a) + γ Σ_{s'} p(s'|s,a) V(s')."""
    return mdp.mean_rewards + mdp.gamma * (mdp.transitions @ np.asarray(values, dtype=float))


def bellman_optimal(mdp: TabularMdp, values: np.ndarray) -> np.ndarray:
    return f_operator(mdp, values).max(axis=1)


def exact_policy_q(mdp: TabularMdp, policy: Sequence[int]) -> np.ndarray:
    return f_operator(mdp, policy_value(mdp, policy))


def truncated_policy_q(mdp: TabularMdp, policy: Sequence[int], tau: int) -> np.ndarray:
    """Q^π_τ(s,a) = E[Σ_{t=0}^{τ} γᵗ r_t] by τ-step matrix recursion."""
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    pol = check_policy(mdp, policy)
    states = np.arange(mdp.n_states)
    q = mdp.mean_rewards.copy()
    for _ in range(tau):
        q = f_operator(mdp, q[states, pol])
    return q


def truncation_horizon(gamma: float, r_max: float, eps: float) -> int:
    """Smallest τ with ‖Q^π − Q^π_τ‖_∞ ≤ eps for every policy."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    tau = math.ceil(math.log(r_max / ((1.0 - gamma) * eps)) / (1.0 - gamma))
    return max(0, tau)


# --- Exact control ---
def value_iteration(mdp: TabularMdp, initial_values: Optional[np.ndarray] = None, tol: float = 1e-10,
                    max_iter: int = 100_000) -> np.ndarray:
    """Runs V ← T*V until the sup-norm step is at most ``tol``.

    Returns:
        Array of shape (n_iterates, S); row 0 is the initial vector.
    """
    v = np.zeros(mdp.n_states) if initial_values is None else np.asarray(initial_values, dtype=float)
    iterates = [v]
    for _ in range(max_iter):
        nxt = bellman_optimal(mdp, v)
        iterates.append(nxt)
        if np.max(np.abs(nxt - v)) <= tol:
            break
        v = nxt
    else:
        logger.warning(f"Value iteration stopped at max_iter={max_iter} before reaching tol={tol}")
    return np.vstack(iterates)


def policy_iteration(mdp: TabularMdp, initial_policy: Optional[Sequence[int]] = None,
                     max_iter: int = 10_000) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Exact PI; stops once greedy improvement no longer raises any state value."""
    pol = np.zeros(mdp.n_states, dtype=np.int64) if initial_policy is None else check_policy(mdp, initial_policy)
    v = policy_value(mdp, pol)
    history = [v]
    for _ in range(max_iter):
        candidate = greedy_policy(f_operator(mdp, v))
        v_new = policy_value(mdp, candidate)
        if np.max(v_new - v) <= 1e-12:
            break
        pol, v = candidate, v_new
        history.append(v)
    return pol, history


def exact_optimal(mdp: TabularMdp, tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """Optimal value and policy: VI to the ε-greedy residual, then a PI check.

    Returns:
        (V*, optimal policy) where V* is the exact value of the returned policy.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    residual_target = tol * (1.0 - mdp.gamma) / (2.0 * mdp.gamma)
    v = value_iteration(mdp, tol=residual_target)[-1]
    pol = greedy_policy(f_operator(mdp, v))
    v_pol = policy_value(mdp, pol)
    improved = greedy_policy(f_operator(mdp, v_pol))
    if np.max(policy_value(mdp, improved) - v_pol) > 1e-12:
        logger.debug("Greedy policy from value iteration was not optimal; finishing with exact PI")
        pol, history = policy_iteration(mdp, improved)
        v_pol = history[-1]
    return v_pol, pol


def enumerate_optimal(mdp: TabularMdp, max_policies: int = 1_000_000) -> Tuple[np.ndarray, np.ndarray]:
    """Brute force over all A^S deterministic policies (tiny instances only)."""
    count = mdp.n_actions ** mdp.n_states
    if count > max_policies:
        raise ValueError(f"{count} policies exceed the enumeration cap {max_policies}")
    best_v, best_pol = None, None
    for actions in itertools.product(range(mdp.n_actions), repeat=mdp.n_states):
        pol = np.array(actions, dtype=np.int64)
        v = policy_value(mdp, pol)
        if best_v is None or v.sum() > best_v.sum() + 1e-12:
            best_v, best_pol = v, pol
    return best_v, best_pol


# --- Generative sampling ---
def sample_returns(mdp: TabularMdp, policy: Sequence[int], start_states: np.ndarray, start_actions: np.ndarray,
                   tau: int, rng: np.random.Generator) -> np.ndarray:
    """Discounted returns Σ_{t=0}^{τ} γᵗ r_t of one rollout per start pair.

    Starts at (s, a), then follows a_t = π(s_t). Reward noise is applied at
    every step.
    """
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    pol = check_policy(mdp, policy)
    start_states = np.asarray(start_states, dtype=np.int64)
    start_actions = np.asarray(start_actions, dtype=np.int64)
    n = start_states.shape[0]
    out = np.empty(n)
    chunk = max(1, _ROLLOUT_CELLS // mdp.n_states)
    for lo in range(0, n, chunk):
        s = start_states[lo:lo + chunk]
        a = start_actions[lo:lo + chunk]
        total = np.zeros(s.shape[0])
        discount = 1.0
        for t in range(tau + 1):
            total += discount * (mdp.mean_rewards[s, a] + mdp.reward_noise.draw(s.shape[0], rng))
            if t == tau:
                break
            s = mdp.next_states(s, a, rng)
            a = pol[s]
            discount *= mdp.gamma
        out[lo:lo + chunk] = total
    return out


def sample_return(mdp: TabularMdp, policy: Sequence[int], start: Tuple[int, int], tau: int,
                  rng: np.random.Generator) -> float:
    """One truncated return from ``start``; the batch version is what oracles call."""
    s, a = start
    return float(sample_returns(mdp, policy, np.array([s]), np.array([a]), tau, rng)[0])


# --- Reference instances ---
def load_toy_mdp() -> TabularMdp:
    """The two-state, two-action MDP used for the condition-number landscape."""
    rewards = np.array([[-0.46, -0.48],
                        [-0.14, 0.28]])
    transitions = np.empty((2, 2, 2))
    transitions[:, 0, :] = [[0.4, 0.6], [0.15, 0.85]]
    transitions[:, 1, :] = [[0.25, 0.75], [0.29, 0.71]]
    return TabularMdp(transitions=transitions, mean_rewards=rewards, gamma=0.87, r_max=0.48)


# --- Serialization ---
def mdp_to_json(mdp: TabularMdp) -> bytes:
    payload = {
        "format": MDP_FORMAT,
        "n_states": mdp.n_states,
        "n_actions": mdp.n_actions,
        "gamma": mdp.gamma,
        "r_max": mdp.r_max,
        "mean_rewards": mdp.mean_rewards.ravel().tolist(),
        "transitions": mdp.transitions.ravel().tolist(),
        "reward_noise": {"kind": mdp.reward_noise.kind, "scale": mdp.reward_noise.scale},
    }
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2)


def mdp_from_json(data: Union[bytes, str, dict]) -> TabularMdp:
    payload = data if isinstance(data, dict) else orjson.loads(data)
    if payload.get("format") != MDP_FORMAT:
        raise ValueError(f"Unsupported MDP format: {payload.get('format')!r}")
    s, a = int(payload["n_states"]), int(payload["n_actions"])
    noise = payload.get("reward_noise") or {}
    return TabularMdp(
        transitions=np.asarray(payload["transitions"], dtype=float).reshape(s, a, s),
        mean_rewards=np.asarray(payload["mean_rewards"], dtype=float).reshape(s, a),
        gamma=float(payload["gamma"]),
        r_max=float(payload["r_max"]),
        reward_noise=RewardNoise(noise.get("kind", "none"), float(noise.get("scale", 0.0))),
    )


def save_mdp(mdp: TabularMdp, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(mdp_to_json(mdp))
    return path


def load_mdp(path: Union[str, Path]) -> TabularMdp:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"MDP file not found: {path}")
    return mdp_from_json(path.read_bytes())
