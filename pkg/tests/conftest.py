"""Shared fixtures: small deterministic matrices and MDPs."""
import numpy as np
import pytest

from src.tools.generators import GeneratorSpec, MatrixSpec, generate_lowrank_matrix, generate_lowrank_mdp
from src.tools.mdp import load_toy_mdp


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def rank3_matrix(rng):
    """A 40×30 matrix of exact rank 3."""
    return rng.standard_normal((40, 3)) @ rng.standard_normal((3, 30))


@pytest.fixture
def spiky_matrix():
    return generate_lowrank_matrix(MatrixSpec(n_rows=60, n_cols=50, rank=3, coherence="spiky",
                                              spike_fraction=0.05, seed=7))


@pytest.fixture
def toy_mdp():
    return load_toy_mdp()


@pytest.fixture
def small_mdp():
    spec = GeneratorSpec(n_states=12, n_actions=10, rank=2, gamma=0.5, seed=3)
    return generate_lowrank_mdp(spec)
