"""Experiment runners keyed by experiment kind."""
from src.harness.runners import cond_landscape, lme_mdp, lora_runs, matrix_completion, toy_golden

# (config, seed, budget) -> records, run once per cell of the sweep.
CELL_RUNNERS = {
    "matrix_completion": matrix_completion.run_cell,
    "lme_mdp": lme_mdp.run_cell,
    "lora_pi": lora_runs.run_pi_cell,
    "lora_vi": lora_runs.run_vi_cell,
}

# (config, out_dir) -> records, run once per experiment.
SINGLE_RUNNERS = {
    "cond_landscape": cond_landscape.run_single,
    "toy_golden": toy_golden.run_single,
}
