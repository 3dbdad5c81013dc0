"""Exception hierarchy shared by the tools, agents and harness."""
from typing import Optional, Tuple


class LmeError(RuntimeError):
    """Base class for failures raised by this package."""


class DecompositionError(LmeError):
    """The SVD routine did not converge."""

    def __init__(self, shape: Tuple[int, ...], cause: Optional[BaseException] = None):
        self.shape = tuple(shape)
        super().__init__(f"SVD did not converge for matrix of shape {self.shape}: {cause}")


class RankError(LmeError, ValueError):
    """A requested rank exceeds the numeric rank of the matrix."""

    def __init__(self, requested: int, numeric_rank: int):
        self.requested = requested
        self.numeric_rank = numeric_rank
        super().__init__(f"Requested rank {requested} exceeds numeric rank {numeric_rank}")


class BudgetTooSmallError(LmeError):
    """The sampling budget cannot cover one trajectory per required entry."""

    def __init__(self, budget: int, minimal_budget: int, reason: str):
        self.budget = budget
        self.minimal_budget = minimal_budget
        self.reason = reason
        super().__init__(f"Budget T={budget} is infeasible ({reason}); minimal feasible T={minimal_budget}")


class AnchorSelectionError(LmeError):
    """Leverage-based anchor sampling kept producing an empty set."""


class EpochFailure(LmeError):
    """An evaluator failed inside a policy/value iteration epoch."""

    def __init__(self, epoch: int, cause: BaseException):
        self.epoch = epoch
        self.cause = cause
        super().__init__(f"Epoch {epoch} failed: {type(cause).__name__}: {cause}")


class ConfigError(LmeError, ValueError):
    """An experiment configuration is missing, unreadable or invalid."""
