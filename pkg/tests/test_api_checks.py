"""Tests for src/agents/api_checks.py."""
import numpy as np
import pytest

from src.agents.api_checks import check_api_bound
from src.agents.lora import EpochLog, LoraConfig, lora_pi
from src.tools.generators import GeneratorSpec, generate_lowrank_mdp
from src.tools.mdp import exact_optimal, exact_policy_q, greedy_policy, policy_value


def _perturbed_run(mdp, eps, epochs, rng):
    """Policy iteration whose evaluations are off by at most ``eps`` entrywise."""
    policy = np.zeros(mdp.n_states, dtype=np.int64)
    logs = []
    for epoch in range(1, epochs + 1):
        truth = exact_policy_q(mdp, policy)
        q_hat = truth + rng.uniform(-eps, eps, truth.shape)
        nxt = greedy_policy(q_hat)
        logs.append(EpochLog(epoch, policy, nxt, float(np.max(np.abs(q_hat - truth))), 0.0, 0, 0, {}))
        policy = nxt
    return logs


class TestApiBound:
    def test_exact_run_has_no_violations(self, toy_mdp):
        config = LoraConfig(budget=10, eps=0.1, evaluator="exact", n_epochs=4)
        _, logs = lora_pi(toy_mdp, config, np.random.default_rng(0))
        report = check_api_bound(toy_mdp, logs)
        assert report.ok
        assert report.epsilon == 0.0
        for gap, bound in zip(report.gaps, report.bounds):
            assert gap <= bound + 1e-9

    @pytest.mark.parametrize("seed", range(20))
    def test_perturbed_evaluations_respect_bound(self, seed):
        rng = np.random.default_rng(seed)
        mdp = generate_lowrank_mdp(GeneratorSpec(n_states=10, n_actions=8, rank=2, gamma=0.7, seed=seed))
        logs = _perturbed_run(mdp, 0.3, 8, rng)
        report = check_api_bound(mdp, logs)
        assert report.violations == []
        assert len(report.gaps) == 8

    def test_fabricated_log_is_reported(self, toy_mdp):
        # Optimal policy "improved" into the worst one while claiming exact evaluation.
        _, best = exact_optimal(toy_mdp)
        policies = [np.array(p) for p in ([0, 0], [0, 1], [1, 0], [1, 1])]
        worst = min(policies, key=lambda p: policy_value(toy_mdp, p).sum())
        logs = [EpochLog(1, best, worst, 0.0, 0.0, 0, 0, {})]
        report = check_api_bound(toy_mdp, logs)
        assert not report.ok
        assert "improvement_upper" in {v.kind for v in report.violations}

    def test_empty_logs(self, toy_mdp):
        with pytest.raises(ValueError):
            check_api_bound(toy_mdp, [])
