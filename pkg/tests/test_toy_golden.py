"""Reference numbers of the two-state MDP and the condition-number landscape."""
import numpy as np
import pytest

from src.core.config import TOY_GOLDEN
from src.harness.runners.cond_landscape import landscape_grid, landscape_overlay
from src.harness.runners.toy_golden import lookahead_conditions, run_golden, vi_condition_trace
from src.tools.linalg_core import condition_number
from src.tools.mdp import f_operator


@pytest.fixture(scope="module")
def golden():
    return run_golden(envelope=True)


class TestGoldenNumbers:
    def test_policy_condition_numbers(self, golden):
        assert list(golden.policy_condition_numbers) == ["0,0", "0,1", "1,0", "1,1"]
        np.testing.assert_allclose(list(golden.policy_condition_numbers.values()),
                                   TOY_GOLDEN["policy_condition_numbers"], atol=0.01)

    def test_v_max(self, golden):
        assert golden.v_max == pytest.approx(3.69, abs=0.005)

    def test_vi_trace_from_rounded_start(self, golden):
        assert golden.vi_max_condition_number == pytest.approx(2140.27, rel=1e-3)
        assert golden.vi_argmax_iteration == 16

    def test_rounding_envelope_contains_reference_value(self, golden):
        low, high = golden.vi_envelope
        assert low <= TOY_GOLDEN["vi_max_condition_number"] <= high

    def test_only_the_vi_value_deviates(self, golden):
        assert len(golden.deviations) == 1
        assert golden.deviations[0].startswith("VI max cond")
        assert "contains" in golden.deviations[0]

    def test_rows_pair_computed_and_reference(self, golden):
        rows = golden.rows()
        assert rows[4] == ("V_max", golden.v_max, 3.69)
        assert len(rows) == 8


class TestLookahead:
    def test_batched_matches_direct(self, toy_mdp):
        values = np.array([[0.0, 0.0], [2.86, 2.98], [-1.0, 3.0]])
        expected = [condition_number(f_operator(toy_mdp, v), 2) for v in values]
        np.testing.assert_allclose(lookahead_conditions(toy_mdp, values), expected, rtol=1e-10)

    def test_trace_starts_at_initial_values(self, toy_mdp):
        trace = vi_condition_trace(toy_mdp, [2.86, 2.98])
        assert trace[0] == pytest.approx(condition_number(f_operator(toy_mdp, np.array([2.86, 2.98])), 2))


class TestLandscape:
    def test_grid_shape(self, toy_mdp):
        grid = landscape_grid(toy_mdp, resolution=8)
        assert len(grid) == 64
        assert grid["v1"].min() == pytest.approx(-toy_mdp.v_max)
        assert (grid["condition_number"] >= 1.0).all()

    def test_grid_needs_two_states(self, small_mdp):
        with pytest.raises(ValueError, match="two-state"):
            landscape_grid(small_mdp)

    def test_overlay(self, toy_mdp):
        overlay = landscape_overlay(toy_mdp, np.array([2.86, 2.98]))
        assert (overlay["kind"] == "policy_value").sum() == 4
        first = overlay[overlay["kind"] == "vi_iterate"].iloc[0]
        assert (first["v1"], first["v2"]) == (2.86, 2.98)
