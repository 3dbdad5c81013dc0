"""Dense linear-algebra utilities and matrix diagnostics.

Every function here is pure: inputs are never modified and results are fresh
arrays, so the module is safe to call from several worker threads at once.
"""
import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Tuple, Union

import numpy as np
import scipy.linalg

from src.core.errors import DecompositionError, RankError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, list, tuple]


# --- Data Structures ---
@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``m = U diag(s) Wᵀ`` with singular values in descending order."""
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.left_vectors.shape[0], self.right_vectors.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


@dataclass(frozen=True)
class ThresholdResult:
    d_hat: int
    q_hat: np.ndarray
    u_hat: np.ndarray
    w_hat: np.ndarray
    empty: bool


@dataclass(frozen=True)
class MatrixDiagnostics:
    rank_numeric: int
    rank_used: int
    condition_number: float
    spikiness: float
    coherence: float
    approx_residual: float
    singular_values: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class LeverageProfile:
    """Normalized left/right leverage scores.

    ``raw_left``/``raw_right`` hold the pre-normalization scores for estimated
    profiles (floored at ``d/S`` and ``d/A``); they are None for exact ones.
    """
    left_scores: np.ndarray
    right_scores: np.ndarray
    rank_used: int
    source: Literal["exact", "estimated"]
    raw_left: Optional[np.ndarray] = field(default=None, repr=False)
    raw_right: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def uniform(cls, n_rows: int, n_cols: int, rank_used: int = 1) -> "LeverageProfile":
        return cls(np.full(n_rows, 1.0 / n_rows), np.full(n_cols, 1.0 / n_cols), rank_used, "exact")


# --- Validation ---
def as_dense(m: ArrayLike, name: str = "matrix") -> np.ndarray:
    """Returns ``m`` as a finite 2-D float array, raising ValueError otherwise."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


# --- Decompositions ---
def svd(m: ArrayLike) -> SvdResult:
    """Thin SVD of a finite matrix.

    Args:
        m: S×A matrix.

    Returns:
        SvdResult with min(S, A) components.

    Raises:
        DecompositionError: if both LAPACK drivers fail to converge.
    """
    arr = as_dense(m)
    try:
        u, s, vt = scipy.linalg.svd(arr, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.warning(f"gesdd did not converge for shape {arr.shape}; retrying with gesvd")
        try:
            u, s, vt = scipy.linalg.svd(arr, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as e:
            raise DecompositionError(arr.shape, e) from e
    return SvdResult(singular_values=s, left_vectors=u, right_vectors=vt.T)


def default_rank_tol(singular_values: np.ndarray, shape: Tuple[int, int]) -> float:
    if singular_values.size == 0:
        return 0.0
    return max(shape) * np.finfo(float).eps * float(singular_values[0])


def numeric_rank(m: Union[ArrayLike, SvdResult], tol: Optional[float] = None) -> int:
    """Counts singular values above ``tol`` (default max(S,A)·eps·σ₁)."""
    dec = m if isinstance(m, SvdResult) else svd(m)
    s = dec.singular_values
    if tol is None:
        tol = default_rank_tol(s, dec.shape)
    return int(np.sum(s > tol))


def threshold_truncate(dec: SvdResult, beta: float) -> ThresholdResult:
    """Keeps the components with σᵢ ≥ β.

    A threshold above σ₁ is valid and yields an empty result (zero matrix,
    zero-width blocks) flagged with ``empty=True``.
    """
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    d_hat = int(np.sum(dec.singular_values >= beta))
    u_hat = dec.left_vectors[:, :d_hat]
    w_hat = dec.right_vectors[:, :d_hat]
    q_hat = (u_hat * dec.singular_values[:d_hat]) @ w_hat.T
    return ThresholdResult(d_hat=d_hat, q_hat=q_hat, u_hat=u_hat, w_hat=w_hat, empty=d_hat == 0)


def row_leverage(block: np.ndarray) -> np.ndarray:
    """Squared row norms of a singular-vector block."""
    return np.einsum("ij,ij->i", block, block)


def leverage_scores_exact(m: ArrayLike, d: int, tol: Optional[float] = None) -> LeverageProfile:
    """Exact leverage scores ℓ_s = ‖U_{s,:}‖²/d from the rank-d singular blocks.

    Raises:
        RankError: if ``d`` exceeds the numeric rank of ``m``.
    """
    dec = svd(m)
    rank = numeric_rank(dec, tol)
    if d < 1 or d > rank:
        raise RankError(d, rank)
    left = row_leverage(dec.left_vectors[:, :d]) / d
    right = row_leverage(dec.right_vectors[:, :d]) / d
    # Orthonormal columns make both sides sum to one; renormalize away rounding.
    return LeverageProfile(left / left.sum(), right / right.sum(), d, "exact")


def condition_number(m: Union[ArrayLike, SvdResult], d: Optional[int] = None) -> float:
    dec = m if isinstance(m, SvdResult) else svd(m)
    s = dec.singular_values
    if d is None:
        d = max(1, numeric_rank(dec))
    if s[d - 1] <= 0:
        return float("inf")
    return float(s[0] / s[d - 1])


def approx_residual(m: ArrayLike, d: int) -> float:
    """ζ_d = ‖m − m_d‖_∞ with m_d the best rank-d approximation."""
    arr = as_dense(m)
    dec = svd(arr)
    d = min(d, dec.singular_values.size)
    m_d = (dec.left_vectors[:, :d] * dec.singular_values[:d]) @ dec.right_vectors[:, :d].T
    return float(np.max(np.abs(arr - m_d)))


def diagnostics(m: ArrayLike, d: Optional[int] = None, tol: Optional[float] = None) -> MatrixDiagnostics:
    """Rank, condition number, spikiness, coherence and ζ_d of a nonzero matrix.

    Args:
        m: S×A matrix.
        d: rank used for coherence, condition number and ζ_d. Defaults to the numeric rank.
        tol: numeric-rank tolerance override.

    Raises:
        ValueError: for the zero matrix, where spikiness is undefined.
    """
    arr = as_dense(m)
    n_rows, n_cols = arr.shape
    fro = float(np.linalg.norm(arr))
    if fro == 0.0:
        raise ValueError("diagnostics are undefined for the zero matrix (spikiness has ‖Q‖_F = 0)")

    dec = svd(arr)
    rank = numeric_rank(dec, tol)
    d_used = rank if d is None else int(d)
    if d_used < 1 or d_used > dec.singular_values.size:
        raise ValueError(f"d must lie in [1, {dec.singular_values.size}], got {d_used}")

    spikiness = np.sqrt(n_rows * n_cols) * float(np.max(np.abs(arr))) / fro
    u_rows = np.sqrt(row_leverage(dec.left_vectors[:, :d_used]))
    w_rows = np.sqrt(row_leverage(dec.right_vectors[:, :d_used]))
    coherence = max(np.sqrt(n_rows / d_used) * u_rows.max(), np.sqrt(n_cols / d_used) * w_rows.max())

    m_d = (dec.left_vectors[:, :d_used] * dec.singular_values[:d_used]) @ dec.right_vectors[:, :d_used].T
    return MatrixDiagnostics(
        rank_numeric=rank,
        rank_used=d_used,
        condition_number=condition_number(dec, d_used),
        spikiness=float(spikiness),
        coherence=float(coherence),
        approx_residual=float(np.max(np.abs(arr - m_d))),
        singular_values=dec.singular_values,
    )


def pseudo_inverse(m: ArrayLike, rank_cap: Optional[int] = None, rtol: float = 1e-10) -> np.ndarray:
    """Moore–Penrose pseudo-inverse with relative and rank truncation.

    Singular values below ``rtol·σ₁``, and any beyond ``rank_cap``, are zeroed
    before inversion. The zero matrix maps to the zero matrix.
    """
    if rtol <= 0:
        raise ValueError(f"rtol must be positive, got {rtol}")
    arr = as_dense(m)
    dec = svd(arr)
    s = dec.singular_values
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((arr.shape[1], arr.shape[0]))
    keep = s > rtol * s[0]
    if rank_cap is not None:
        keep[max(0, int(rank_cap)):] = False
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (dec.right_vectors * inv) @ dec.left_vectors.T


def top_k_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` largest scores, lowest index first on ties, sorted ascending."""
    order = np.argsort(-np.asarray(scores, dtype=float), kind="stable")
    return np.sort(order[: max(0, int(k))])
