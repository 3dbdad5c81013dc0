"""Condition number of F(V) over a grid of two-state value vectors."""
import itertools
import logging
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from src.core.config import HARNESS_CONFIG, TOY_GOLDEN
from src.harness.runners.common import source_mdp
from src.harness.runners.toy_golden import lookahead_conditions
from src.harness.schemas import ExperimentConfig, ExperimentRecord
from src.tools.mdp import TabularMdp, policy_value, value_iteration

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def landscape_grid(mdp: TabularMdp, resolution: int = 64) -> pd.DataFrame:
    """cond(F(V)) on a resolution×resolution grid over [−V_max, V_max]²."""
    if mdp.n_states != 2:
        raise ValueError(f"the landscape needs a two-state MDP, got S={mdp.n_states}")
    axis = np.linspace(-mdp.v_max, mdp.v_max, resolution)
    v1, v2 = np.meshgrid(axis, axis, indexing="ij")
    points = np.column_stack([v1.ravel(), v2.ravel()])
    return pd.DataFrame({"v1": points[:, 0], "v2": points[:, 1],
                         "condition_number": lookahead_conditions(mdp, points)})


def landscape_overlay(mdp: TabularMdp, initial_values: np.ndarray) -> pd.DataFrame:
    """Values of every deterministic policy and the VI path from ``initial_values``."""
    rows = []
    for actions in itertools.product(range(mdp.n_actions), repeat=mdp.n_states):
        v = policy_value(mdp, np.array(actions))
        rows.append({"kind": "policy_value", "label": "".join(map(str, actions)), "v1": v[0], "v2": v[1]})
    for t, v in enumerate(value_iteration(mdp, initial_values)):
        rows.append({"kind": "vi_iterate", "label": str(t), "v1": v[0], "v2": v[1]})
    return pd.DataFrame(rows)


def run_single(config: ExperimentConfig, out_dir: Path) -> List[ExperimentRecord]:
    mdp = source_mdp(config, 0)
    initial = np.asarray(config.vi_initial_values or TOY_GOLDEN["vi_initial_values"], dtype=float)
    grid = landscape_grid(mdp, config.landscape_resolution)
    overlay = landscape_overlay(mdp, initial)

    out_dir.mkdir(parents=True, exist_ok=True)
    grid_path = out_dir / HARNESS_CONFIG["LANDSCAPE_FILENAME"]
    overlay_path = out_dir / HARNESS_CONFIG["LANDSCAPE_OVERLAY_FILENAME"]
    grid.to_csv(grid_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    overlay.to_csv(overlay_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(grid)} grid points to {grid_path} and overlay to {overlay_path}")

    path = overlay[overlay["kind"] == "vi_iterate"][["v1", "v2"]].to_numpy()
    conds = lookahead_conditions(mdp, path)
    return [
        ExperimentRecord(experiment=config.experiment_id, evaluator="value_iteration", seed=0, budget=0, epoch=t,
                         condition_number=float(c))
        for t, c in enumerate(conds)
    ]
