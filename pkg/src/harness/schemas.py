"""Experiment configuration and record schemas."""
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import orjson
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.agents.evaluators import EVALUATORS
from src.agents.lme_estimator import EstimatorSettings
from src.agents.lora import LoraConfig
from src.core.errors import ConfigError
from src.tools.generators import GeneratorSpec, MatrixSpec

logger = logging.getLogger(__name__)

ExperimentKind = Literal["matrix_completion", "lme_mdp", "lora_pi", "lora_vi", "cond_landscape", "toy_golden"]
SWEPT_KINDS = ("matrix_completion", "lme_mdp", "lora_pi", "lora_vi")

RECORD_COLUMNS = [
    "experiment", "evaluator", "seed", "budget", "epoch", "status",
    "entrywise_error", "frobenius_error", "value_suboptimality", "condition_number",
    "d_hat", "consumed", "warnings", "error",
]
RECORD_KEY = ["experiment", "evaluator", "seed", "budget", "epoch"]


class ExperimentConfig(BaseModel):
    """One experiment: an instance source, evaluators and a (seed × budget) sweep."""
    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind
    name: Optional[str] = None
    seeds: List[int] = Field(default_factory=lambda: [0])
    budgets: List[int] = Field(default_factory=list)
    evaluators: List[str] = Field(default_factory=lambda: ["lme_leveraged"])
    delta: float = Field(default=0.1, gt=0.0, lt=1.0)

    # --- Instance sources ---
    generator: Optional[GeneratorSpec] = None
    matrix: Optional[MatrixSpec] = None
    mdp_path: Optional[str] = None
    toy_mdp: bool = False
    noise_std: float = Field(default=0.01, ge=0.0)
    policy: Union[Literal["zeros", "random"], List[int]] = "random"

    # --- Algorithm blocks ---
    estimator: EstimatorSettings = Field(default_factory=EstimatorSettings)
    lora: Dict[str, Any] = Field(default_factory=dict)

    # --- Landscape ---
    landscape_resolution: int = Field(default=64, ge=2)
    vi_initial_values: Optional[List[float]] = None

    output_dir: Optional[str] = None

    @field_validator("seeds")
    @classmethod
    def _seeds(cls, seeds: List[int]) -> List[int]:
        if not seeds:
            raise ValueError("at least one seed is required")
        if any(s < 0 for s in seeds):
            raise ValueError("seeds must be non-negative")
        return seeds

    @field_validator("budgets")
    @classmethod
    def _budgets(cls, budgets: List[int]) -> List[int]:
        if any(b <= 0 for b in budgets):
            raise ValueError("budgets must be positive")
        if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
            raise ValueError("budgets must be strictly increasing")
        return budgets

    @field_validator("evaluators")
    @classmethod
    def _evaluators(cls, evaluators: List[str]) -> List[str]:
        unknown = [e for e in evaluators if e not in EVALUATORS]
        if unknown:
            raise ValueError(f"unknown evaluators {unknown}; available: {sorted(EVALUATORS)}")
        if not evaluators:
            raise ValueError("at least one evaluator is required")
        return evaluators

    @model_validator(mode="after")
    def _sources(self):
        if self.kind in SWEPT_KINDS and not self.budgets:
            raise ValueError(f"kind '{self.kind}' needs a budget sweep")
        if self.kind == "matrix_completion" and self.matrix is None:
            raise ValueError("matrix_completion needs a 'matrix' block")
        if self.kind in ("lme_mdp", "lora_pi", "lora_vi"):
            sources = sum([self.generator is not None, self.mdp_path is not None, self.toy_mdp])
            if sources != 1:
                raise ValueError(f"kind '{self.kind}' needs exactly one of generator, mdp_path, toy_mdp")
        if self.kind in ("lora_pi", "lora_vi"):
            for evaluator in self.evaluators:
                LoraConfig(budget=self.budgets[0], evaluator=evaluator, estimator=self.estimator, **self.lora)
        return self

    @property
    def experiment_id(self) -> str:
        return self.name or self.kind


class ExperimentRecord(BaseModel):
    """One CSV row; unique on (experiment, evaluator, seed, budget, epoch)."""
    model_config = ConfigDict(extra="forbid")

    experiment: str
    evaluator: str
    seed: int
    budget: int
    epoch: int = 0
    status: Literal["ok", "failed"] = "ok"
    entrywise_error: Optional[float] = Field(default=None, ge=0.0)
    frobenius_error: Optional[float] = Field(default=None, ge=0.0)
    value_suboptimality: Optional[float] = Field(default=None, ge=0.0)
    condition_number: Optional[float] = None
    d_hat: Optional[int] = None
    consumed: Optional[int] = None
    warnings: str = ""
    error: str = ""

    @property
    def key(self) -> Tuple[str, str, int, int, int]:
        return self.experiment, self.evaluator, self.seed, self.budget, self.epoch

    def to_row(self) -> Dict[str, Any]:
        return self.model_dump()


def resolve_mdp_path(config_path: Path, mdp_path: str) -> Path:
    """Relative MDP paths are taken from the directory of the config file."""
    candidate = Path(mdp_path)
    if not candidate.is_absolute():
        candidate = config_path.parent / candidate
    if not candidate.is_file():
        raise ConfigError(f"mdp_path '{mdp_path}' in {config_path} does not name a file ({candidate})")
    return candidate


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Reads a JSON or YAML experiment file.

    Raises:
        ConfigError: if the file is missing, unparsable or invalid.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        raw = path.read_bytes()
        if path.suffix.lower() in (".yaml", ".yml"):
            payload = yaml.safe_load(raw)
        else:
            payload = orjson.loads(raw)
    except (orjson.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"Could not parse {path}: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"Config {path} must contain a mapping at top level")
    try:
        config = ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}: {e}") from e
    if config.mdp_path is not None:
        config.mdp_path = str(resolve_mdp_path(path, config.mdp_path))
    logger.info(f"Loaded {config.kind} config '{config.experiment_id}' from {path}")
    return config
