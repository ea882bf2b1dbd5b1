"""
Diagonal multivariate normal representations and their KL-based scores.

A query or document is a k-variate normal N(mu, diag(sigma^2)). Relevance is
the negative KL divergence KL(Q || D). Products of k variances are never
materialized: they are carried as sums of log-variances, and only ratios
are exponentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatchError, EmbeddingValidationError
from ..utils.validators import as_finite_vector

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class GaussianEmbedding:
    """
    A diagonal-covariance multivariate normal with an identifier.

    Attributes:
        id: Query or document identifier
        mean: Mean vector, length k
        variance: Diagonal of the covariance matrix, length k, strictly positive
    """

    id: str
    mean: np.ndarray
    variance: np.ndarray
    log_variance_sum: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        try:
            mean = as_finite_vector(self.mean, "mean")
            variance = as_finite_vector(self.variance, "variance")
        except ValueError as exc:
            raise EmbeddingValidationError(str(exc), self.id) from exc
        if mean.size == 0:
            raise EmbeddingValidationError("dimension k must be at least 1", self.id)
        if mean.size != variance.size:
            raise EmbeddingValidationError(
                f"mean has {mean.size} entries but variance has {variance.size}", self.id
            )
        if not np.all(variance > 0.0):
            raise EmbeddingValidationError("variance entries must be strictly positive", self.id)
        mean.flags.writeable = False
        variance.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", variance)
        object.__setattr__(self, "log_variance_sum", float(np.sum(np.log(variance))))

    @property
    def k(self) -> int:
        """Number of random variables."""
        return int(self.mean.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GaussianEmbedding):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.variance, other.variance)
        )

    def __hash__(self) -> int:
        return hash(self.id)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` samples, shape (n, k)."""
        return self.mean + rng.standard_normal((n, self.k)) * np.sqrt(self.variance)


def _require_same_k(q: GaussianEmbedding, d: GaussianEmbedding) -> int:
    if q.k != d.k:
        raise DimensionMismatchError(f"dimension mismatch: {q.id} has k={q.k}, {d.id} has k={d.k}")
    return q.k


def log_pdf(x, g: GaussianEmbedding) -> float:
    """Log-density of ``g`` at ``x``."""
    x = as_finite_vector(x, "x")
    if x.size != g.k:
        raise DimensionMismatchError(f"x has {x.size} entries, embedding has k={g.k}")
    mahalanobis = float(np.sum((x - g.mean) ** 2 / g.variance))
    return -0.5 * (g.k * LOG_2PI + g.log_variance_sum + mahalanobis)


def pdf(x, g: GaussianEmbedding) -> float:
    """Density of ``g`` at ``x``, evaluated in log space and exponentiated."""
    return math.exp(log_pdf(x, g))


def kl_divergence(q: GaussianEmbedding, d: GaussianEmbedding) -> float:
    """
    Closed-form KL(Q || D) for diagonal Gaussians.

    ½ [ Σ log(σ_d²/σ_q²) − k + Σ σ_q²/σ_d² + Σ (μ_q − μ_d)²/σ_d² ]
    """
    k = _require_same_k(q, d)
    log_ratio = np.log(d.variance) - np.log(q.variance)
    trace = q.variance / d.variance
    mahalanobis = (q.mean - d.mean) ** 2 / d.variance
    return 0.5 * float(np.sum(log_ratio) - k + np.sum(trace) + np.sum(mahalanobis))


def _variance_ratio(q: GaussianEmbedding, d: GaussianEmbedding) -> float:
    # ∏σ_q² / ∏σ_d²; overflows to inf rather than raising
    with np.errstate(over="ignore"):
        return float(np.exp(q.log_variance_sum - d.log_variance_sum))


def rank_score(q: GaussianEmbedding, d: GaussianEmbedding) -> float:
    """
    Rank-equivalent negative KL score in the product form.

    −[ Σ log σ_d² + ∏σ_q²/∏σ_d² + Σ (μ_q − μ_d)²/σ_d² ]

    The ½ factor is dropped so the value equals the inner product of the
    augmented vectors built in :mod:`mvn_retrieval.core.transform`.
    """
    _require_same_k(q, d)
    mahalanobis = float(np.sum((q.mean - d.mean) ** 2 / d.variance))
    return -(d.log_variance_sum + _variance_ratio(q, d) + mahalanobis)


def kl_rank_score(q: GaussianEmbedding, d: GaussianEmbedding) -> float:
    """
    Rank-equivalent negative KL score in the exact (trace) form.

    −[ Σ log σ_d² + Σ σ_q²/σ_d² + Σ (μ_q − μ_d)²/σ_d² ], which equals
    −2·KL(q‖d) − (Σ log σ_q² + k). Agrees with :func:`rank_score` at k = 1.
    """
    _require_same_k(q, d)
    trace = float(np.sum(q.variance / d.variance))
    mahalanobis = float(np.sum((q.mean - d.mean) ** 2 / d.variance))
    return -(d.log_variance_sum + trace + mahalanobis)


__all__ = [
    "GaussianEmbedding",
    "log_pdf",
    "pdf",
    "kl_divergence",
    "rank_score",
    "kl_rank_score",
]
