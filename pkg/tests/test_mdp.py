"""Tests for src/tools/mdp.py: exact solvers, Bellman maps and sampling."""
import numpy as np
import pytest

from src.tools.mdp import (
    RewardNoise,
    TabularMdp,
    bellman_optimal,
    check_policy,
    enumerate_optimal,
    exact_optimal,
    exact_policy_q,
    f_operator,
    greedy_policy,
    load_mdp,
    mdp_from_json,
    mdp_to_json,
    policy_iteration,
    policy_value,
    sample_return,
    sample_returns,
    save_mdp,
    truncated_policy_q,
    truncation_horizon,
    value_iteration,
)


class TestTabularMdp:
    def test_rejects_non_stochastic_rows(self):
        with pytest.raises(ValueError, match="probability"):
            TabularMdp(np.full((2, 1, 2), 0.6), np.zeros((2, 1)), 0.9, 1.0)

    def test_rejects_gamma_one(self):
        with pytest.raises(ValueError, match="gamma"):
            TabularMdp(np.full((2, 1, 2), 0.5), np.zeros((2, 1)), 1.0, 1.0)

    def test_rejects_reward_above_r_max(self):
        with pytest.raises(ValueError, match="r_max"):
            TabularMdp(np.full((2, 1, 2), 0.5), np.full((2, 1), 2.0), 0.5, 1.0)

    def test_arrays_are_read_only(self, toy_mdp):
        with pytest.raises(ValueError):
            toy_mdp.mean_rewards[0, 0] = 1.0

    def test_toy_v_max(self, toy_mdp):
        assert toy_mdp.v_max == pytest.approx(3.69, abs=0.005)

    def test_bad_noise_kind(self):
        with pytest.raises(ValueError):
            RewardNoise("cauchy", 1.0)


class TestPolicies:
    def test_check_policy_rejects_out_of_range(self, toy_mdp):
        with pytest.raises(ValueError):
            check_policy(toy_mdp, [0, 2])

    def test_check_policy_rejects_floats(self, toy_mdp):
        with pytest.raises(ValueError):
            check_policy(toy_mdp, [0.0, 1.0])

    def test_greedy_ties_take_lowest_action(self):
        np.testing.assert_array_equal(greedy_policy(np.array([[1.0, 1.0], [0.0, 2.0]])), [0, 1])


class TestExactEvaluation:
    def test_policy_value_is_fixed_point(self, small_mdp, rng):
        pol = rng.integers(0, small_mdp.n_actions, small_mdp.n_states)
        v = policy_value(small_mdp, pol)
        q = f_operator(small_mdp, v)
        np.testing.assert_allclose(q[np.arange(small_mdp.n_states), pol], v, atol=1e-10)

    def test_truncated_q_converges(self, small_mdp):
        pol = np.zeros(small_mdp.n_states, dtype=int)
        exact = exact_policy_q(small_mdp, pol)
        tau = truncation_horizon(small_mdp.gamma, small_mdp.r_max, 1e-6)
        np.testing.assert_allclose(truncated_policy_q(small_mdp, pol, tau), exact, atol=1e-6)

    def test_truncated_q_at_zero_is_reward(self, toy_mdp):
        np.testing.assert_array_equal(truncated_policy_q(toy_mdp, [0, 0], 0), toy_mdp.mean_rewards)

    def test_truncation_horizon(self):
        # ⌈log(1/(0.1·0.1))/0.1⌉ = ⌈46.05⌉
        assert truncation_horizon(0.9, 1.0, 0.1) == 47

    def test_value_matrix_of_low_rank_mdp_has_low_rank(self, small_mdp, rng):
        pol = rng.integers(0, small_mdp.n_actions, small_mdp.n_states)
        s = np.linalg.svd(exact_policy_q(small_mdp, pol), compute_uv=False)
        assert s[2] < 1e-10 * s[0]


class TestControl:
    def test_value_iteration_keeps_initial_row(self, toy_mdp):
        iterates = value_iteration(toy_mdp, np.array([2.86, 2.98]))
        np.testing.assert_array_equal(iterates[0], [2.86, 2.98])
        np.testing.assert_allclose(bellman_optimal(toy_mdp, iterates[-1]), iterates[-1], atol=1e-8)

    def test_exact_optimal_matches_enumeration(self, toy_mdp):
        v_star, pol = exact_optimal(toy_mdp)
        v_enum, pol_enum = enumerate_optimal(toy_mdp)
        np.testing.assert_allclose(v_star, v_enum, atol=1e-9)
        np.testing.assert_array_equal(pol, pol_enum)

    def test_policy_iteration_reaches_optimum(self, small_mdp):
        v_star, _ = exact_optimal(small_mdp)
        pol, history = policy_iteration(small_mdp)
        np.testing.assert_allclose(history[-1], v_star, atol=1e-8)
        for before, after in zip(history, history[1:]):
            assert np.all(after >= before - 1e-10)

    def test_enumeration_cap(self, small_mdp):
        with pytest.raises(ValueError, match="cap"):
            enumerate_optimal(small_mdp, max_policies=10)


class TestSampling:
    def test_rollout_mean_matches_truncated_q(self, toy_mdp):
        rng = np.random.default_rng(0)
        n = 200_000
        returns = sample_returns(toy_mdp, [0, 1], np.zeros(n, dtype=int), np.ones(n, dtype=int), 5, rng)
        expected = truncated_policy_q(toy_mdp, [0, 1], 5)[0, 1]
        assert returns.mean() == pytest.approx(expected, abs=5e-3)

    def test_zero_horizon_is_reward(self, toy_mdp):
        returns = sample_returns(toy_mdp, [0, 0], np.array([1, 0]), np.array([1, 1]), 0, np.random.default_rng(1))
        np.testing.assert_allclose(returns, [0.28, -0.48])

    def test_bounded_noise_stays_in_range(self):
        noise = RewardNoise("bounded_uniform", 0.4)
        draws = noise.draw(10_000, np.random.default_rng(2))
        assert draws.min() >= -0.2 and draws.max() <= 0.2
        assert noise.bounded and not RewardNoise("gaussian", 0.1).bounded


class TestSerialization:
    def test_json_preserves_model(self, small_mdp):
        restored = mdp_from_json(mdp_to_json(small_mdp))
        np.testing.assert_array_equal(restored.transitions, small_mdp.transitions)
        assert restored.gamma == small_mdp.gamma

    def test_save_and_load(self, toy_mdp, tmp_path):
        path = save_mdp(toy_mdp, tmp_path / "toy.json")
        np.testing.assert_array_equal(load_mdp(path).mean_rewards, toy_mdp.mean_rewards)

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="format"):
            mdp_from_json({"format": "other"})

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_mdp(tmp_path / "absent.json")


def _random_mdp(rng, n_states, n_actions, gamma):
    return TabularMdp(rng.dirichlet(np.ones(n_states), size=(n_states, n_actions)),
                      rng.uniform(-1.0, 1.0, (n_states, n_actions)), gamma, 1.0)


def _chain():
    """0 → 1 → 2 → 2 under the single action, deterministic."""
    transitions = np.zeros((3, 1, 3))
    transitions[0, 0, 1] = transitions[1, 0, 2] = transitions[2, 0, 2] = 1.0
    return TabularMdp(transitions, np.array([[0.1], [0.2], [0.3]]), 0.5, 1.0)


class TestSampleReturn:
    def test_zero_horizon_is_mean_reward(self, toy_mdp):
        assert sample_return(toy_mdp, [0, 1], (1, 1), 0, np.random.default_rng(0)) == pytest.approx(0.28)

    def test_deterministic_chain(self):
        # 0.1 + 0.5·0.2 + 0.25·0.3
        assert sample_return(_chain(), [0, 0, 0], (0, 0), 2, np.random.default_rng(0)) == pytest.approx(0.275)

    def test_mean_matches_truncated_q(self, toy_mdp):
        rng = np.random.default_rng(4)
        draws = np.array([sample_return(toy_mdp, [1, 1], (0, 0), 3, rng) for _ in range(20_000)])
        expected = truncated_policy_q(toy_mdp, [1, 1], 3)[0, 0]
        assert abs(draws.mean() - expected) < 4 * draws.std() / np.sqrt(draws.size)


class TestContraction:
    @pytest.mark.parametrize("seed", range(5))
    def test_bellman_maps_contract_by_gamma(self, seed):
        rng = np.random.default_rng(seed)
        mdp = _random_mdp(rng, 9, 4, 0.8)
        for _ in range(20):
            v, w = rng.normal(0.0, 3.0, (2, 9))
            gap = np.max(np.abs(v - w))
            assert np.max(np.abs(bellman_optimal(mdp, v) - bellman_optimal(mdp, w))) <= mdp.gamma * gap + 1e-12
            assert np.max(np.abs(f_operator(mdp, v) - f_operator(mdp, w))) <= mdp.gamma * gap + 1e-12


class TestTruncationSweep:
    @pytest.mark.parametrize("eps", [0.1, 0.01])
    def test_truncated_q_within_eps_on_random_mdps(self, eps):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            gamma = float(rng.uniform(0.5, 0.95))
            mdp = _random_mdp(rng, int(rng.integers(2, 31)), int(rng.integers(1, 31)), gamma)
            pol = rng.integers(0, mdp.n_actions, mdp.n_states)
            tau = truncation_horizon(gamma, mdp.r_max, eps)
            gap = np.max(np.abs(truncated_policy_q(mdp, pol, tau) - exact_policy_q(mdp, pol)))
            assert gap <= eps


@pytest.mark.slow
def test_exact_optimal_matches_enumeration_on_random_mdp():
    mdp = _random_mdp(np.random.default_rng(31), 8, 5, 0.8)
    v_star, _ = exact_optimal(mdp)
    v_enum, pol_enum = enumerate_optimal(mdp)
    np.testing.assert_allclose(v_star, v_enum, atol=1e-8)
    np.testing.assert_allclose(policy_value(mdp, pol_enum), v_star, atol=1e-8)
