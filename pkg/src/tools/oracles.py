"""Entry oracles: noisy, unbiased samplers of the entries of an S×A target matrix.

An oracle returns *sums* of i.i.d. observations per requested entry, which is
all the estimators need and lets direct Gaussian oracles skip materializing
individual draws.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import LmeError
from src.tools.mdp import TabularMdp, check_policy, exact_policy_q, f_operator, sample_returns, truncated_policy_q

logger = logging.getLogger(__name__)

# Upper bound on the number of single observations simulated at once.
_OBS_CHUNK = 1 << 20


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent Philox stream keyed by ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))))


# --- Budget accounting ---
@dataclass
class BudgetLedger:
    """Counts single transitions (entry draws) against a budget."""
    budget: int
    consumed: int = 0
    by_label: Dict[str, int] = field(default_factory=dict)

    @property
    def remaining(self) -> int:
        return self.budget - self.consumed

    def charge(self, n_samples: int, cost_per_sample: int, label: str) -> int:
        cost = int(n_samples) * int(cost_per_sample)
        if self.consumed + cost > self.budget:
            raise LmeError(f"Budget overrun in '{label}': {self.consumed} + {cost} > {self.budget}")
        self.consumed += cost
        self.by_label[label] = self.by_label.get(label, 0) + cost
        return cost


# --- Oracle interface ---
class EntryOracle(ABC):
    """Generative access to a target matrix.

    ``kind`` is ``"rollout"`` when one observation is a truncated trajectory of
    ``τ+1`` transitions, and ``"direct"`` when it costs a single draw.
    """
    kind: str = "direct"

    def __init__(self, shape: Tuple[int, int]):
        self.shape = (int(shape[0]), int(shape[1]))

    def horizon(self, budget: int, gamma: float) -> int:
        """Truncation horizon τ used for a plan with budget T."""
        if self.kind != "rollout":
            return 0
        return max(0, math.ceil(math.log(budget / (1.0 - gamma)) / (1.0 - gamma)))

    def cost_per_sample(self, tau: int) -> int:
        return tau + 1 if self.kind == "rollout" else 1

    @abstractmethod
    def _draw_sums(self, rows: np.ndarray, cols: np.ndarray, counts: np.ndarray, rng: np.random.Generator,
                   tau: int) -> np.ndarray:
        ...

    @abstractmethod
    def target(self) -> np.ndarray:
        """The matrix whose entries the observations estimate (untruncated)."""

    def expected(self, tau: int) -> np.ndarray:
        """Exact expectation of one observation per entry at horizon ``tau``."""
        return self.target()

    def sample_sums(self, rows: Sequence[int], cols: Sequence[int], counts: Sequence[int],
                    rng: np.random.Generator, tau: int = 0, ledger: Optional[BudgetLedger] = None,
                    label: str = "samples") -> np.ndarray:
        """Sum of ``counts[i]`` observations of entry ``(rows[i], cols[i])``.

        Entries with a zero count sum to 0. When ``ledger`` is given, it is
        charged ``Σ counts · cost_per_sample(tau)`` before any draw.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        if not (rows.shape == cols.shape == counts.shape) or rows.ndim != 1:
            raise ValueError("rows, cols and counts must be 1-D arrays of equal length")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        if rows.size and (rows.min() < 0 or rows.max() >= self.shape[0] or cols.min() < 0 or cols.max() >= self.shape[1]):
            raise ValueError(f"entry index out of range for shape {self.shape}")
        if self.kind != "rollout" and tau != 0:
            raise ValueError(f"direct oracles use tau=0, got {tau}")
        if ledger is not None:
            ledger.charge(int(counts.sum()), self.cost_per_sample(tau), label)
        if rows.size == 0:
            return np.zeros(0)
        return self._draw_sums(rows, cols, counts, rng, tau)

    def sample(self, entry: Tuple[int, int], count: int, rng: np.random.Generator, tau: int = 0) -> np.ndarray:
        """``count`` individual observations of one entry."""
        n = int(count)
        rows = np.full(n, entry[0], dtype=np.int64)
        cols = np.full(n, entry[1], dtype=np.int64)
        return self.sample_sums(rows, cols, np.ones(n, dtype=np.int64), rng, tau)

    def _per_observation(self, rows: np.ndarray, cols: np.ndarray, counts: np.ndarray, rng: np.random.Generator,
                         draw) -> np.ndarray:
        """Sums per-observation draws ``draw(obs_rows, obs_cols, rng)`` in bounded chunks."""
        # owner[i] is the request index that observation i belongs to
        owner = np.repeat(np.arange(rows.size), counts)
        sums = np.zeros(rows.size)
        for lo in range(0, owner.size, _OBS_CHUNK):
            idx = owner[lo:lo + _OBS_CHUNK]
            values = draw(rows[idx], cols[idx], rng)
            sums += np.bincount(idx, weights=values, minlength=rows.size)
        return sums


# --- Concrete oracles ---
class RolloutOracle(EntryOracle):
    """Monte-Carlo rollouts of a fixed policy; estimates Q^π_τ."""
    kind = "rollout"

    def __init__(self, mdp: TabularMdp, policy: Sequence[int]):
        super().__init__(mdp.shape)
        self.mdp = mdp
        self.policy = check_policy(mdp, policy)

    def _draw_sums(self, rows, cols, counts, rng, tau):
        return self._per_observation(
            rows, cols, counts, rng,
            lambda r, c, g: sample_returns(self.mdp, self.policy, r, c, tau, g),
        )

    def target(self) -> np.ndarray:
        return exact_policy_q(self.mdp, self.policy)

    def expected(self, tau: int) -> np.ndarray:
        return truncated_policy_q(self.mdp, self.policy, tau)


class NoisyMatrixOracle(EntryOracle):
    """Entries of a fixed matrix plus i.i.d. Gaussian noise of std ``noise_std``.

    Sums are drawn in closed form, ``n·M + σ√n·z``, so the cost of a call
    does not grow with the counts.
    """

    def __init__(self, matrix: np.ndarray, noise_std: float = 0.0):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {matrix.shape}")
        if noise_std < 0:
            raise ValueError(f"noise_std must be non-negative, got {noise_std}")
        super().__init__(matrix.shape)
        self.matrix = matrix
        self.noise_std = float(noise_std)

    def _draw_sums(self, rows, cols, counts, rng, tau):
        means = counts * self.matrix[rows, cols]
        if self.noise_std == 0.0:
            return means
        return means + self.noise_std * np.sqrt(counts) * rng.standard_normal(rows.size)

    def target(self) -> np.ndarray:
        return self.matrix


class BellmanSampleOracle(EntryOracle):
    """One-step samples of F(V): ``r(s,a) + noise + γ·V(s')`` with s' ~ p(·|s,a)."""

    def __init__(self, mdp: TabularMdp, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (mdp.n_states,):
            raise ValueError(f"values must have length {mdp.n_states}, got {values.shape}")
        super().__init__(mdp.shape)
        self.mdp = mdp
        self.values = values

    @property
    def observation_bound(self) -> float:
        """Bound on |r + γV(s')| used in place of r_max by the threshold formula."""
        return self.mdp.r_max + self.mdp.gamma * float(np.max(np.abs(self.values)))

    def _draw(self, rows, cols, rng):
        nxt = self.mdp.next_states(rows, cols, rng)
        noise = self.mdp.reward_noise.draw(rows.size, rng)
        return self.mdp.mean_rewards[rows, cols] + noise + self.mdp.gamma * self.values[nxt]

    def _draw_sums(self, rows, cols, counts, rng, tau):
        return self._per_observation(rows, cols, counts, rng, self._draw)

    def target(self) -> np.ndarray:
        return f_operator(self.mdp, self.values)
