"""Tests for src/agents/evaluators.py."""
import numpy as np
import pytest

from src.agents.evaluators import EVALUATORS, EvaluationRequest, get_evaluator
from src.agents.lme_estimator import EstimatorSettings
from src.core.errors import BudgetTooSmallError
from src.tools.oracles import NoisyMatrixOracle, RolloutOracle


def _request(matrix, budget=10**6, noise_std=0.0, seed=0, **settings):
    return EvaluationRequest(
        oracle=NoisyMatrixOracle(matrix, noise_std),
        budget=budget, delta=0.1, gamma=0.0, r_max=1.0,
        rng=np.random.default_rng(seed),
        settings=EstimatorSettings(**settings),
        truth=matrix,
    )


class TestRegistry:
    def test_names(self):
        assert set(EVALUATORS) == {"lme_leveraged", "cur_uniform_anchors", "cur_oracle_anchors",
                                   "full_matrix_mc", "svd_denoise", "exact"}

    def test_unknown(self):
        with pytest.raises(ValueError, match="Unknown evaluator"):
            get_evaluator("nearest_neighbour")


class TestNoiselessRecovery:
    @pytest.mark.parametrize("name", ["cur_uniform_anchors", "cur_oracle_anchors", "full_matrix_mc",
                                      "svd_denoise", "exact"])
    def test_recovers_exact_matrix(self, rank3_matrix, name):
        q_hat, report = get_evaluator(name)(_request(rank3_matrix, rank=3, n_anchors=8, anchor_mode="top_k"))
        assert q_hat.shape == rank3_matrix.shape
        assert report["entrywise_error"] < 1e-8
        assert report["consumed"] <= 10**6

    def test_exact_is_free(self, rank3_matrix):
        _, report = get_evaluator("exact")(_request(rank3_matrix))
        assert report["consumed"] == 0

    def test_uniform_anchors_skip_leverage_phase(self, rank3_matrix):
        _, report = get_evaluator("cur_uniform_anchors")(_request(rank3_matrix, rank=3, n_anchors=8))
        assert report["consumed_phase1"] == 0
        assert report["n_anchor_rows"] == 8
        assert report["anchor_mode"] == "uniform"

    def test_oracle_anchors_use_bernoulli_when_mode_is_uniform(self, rank3_matrix):
        _, report = get_evaluator("cur_oracle_anchors")(
            _request(rank3_matrix, rank=3, n_anchors=8, anchor_mode="uniform"))
        assert report["anchor_mode"] == "oracle_bernoulli"


class TestFullMatrix:
    def test_per_entry_count(self):
        m = np.ones((10, 10))
        _, report = get_evaluator("full_matrix_mc")(_request(m, budget=1050))
        assert report["n_square"] == 10
        assert report["consumed"] == 1000

    def test_rollout_cost(self, small_mdp):
        policy = np.zeros(small_mdp.n_states, dtype=int)
        oracle = RolloutOracle(small_mdp, policy)
        request = EvaluationRequest(oracle, 10**6, 0.1, small_mdp.gamma, 1.0, np.random.default_rng(0))
        _, report = get_evaluator("full_matrix_mc")(request)
        tau = oracle.horizon(10**6, small_mdp.gamma)
        assert report["tau"] == tau
        assert report["consumed"] == report["n_square"] * (tau + 1) * 120

    def test_budget_too_small(self):
        with pytest.raises(BudgetTooSmallError) as info:
            get_evaluator("full_matrix_mc")(_request(np.ones((20, 20)), budget=100))
        assert info.value.minimal_budget == 400

    def test_svd_denoise_threshold_rank(self, rank3_matrix):
        _, report = get_evaluator("svd_denoise")(_request(rank3_matrix, beta=1e-3))
        assert report["d_hat"] == 3
        assert report["beta"] == pytest.approx(1e-3)


class TestNoisyOrdering:
    def test_denoising_beats_raw_average_in_frobenius(self, spiky_matrix):
        raw = [get_evaluator("full_matrix_mc")(_request(spiky_matrix, 10**5, 0.5, seed))[1]["frobenius_error"]
               for seed in range(5)]
        den = [get_evaluator("svd_denoise")(_request(spiky_matrix, 10**5, 0.5, seed, rank=3))[1]["frobenius_error"]
               for seed in range(5)]
        assert np.median(den) < np.median(raw)
