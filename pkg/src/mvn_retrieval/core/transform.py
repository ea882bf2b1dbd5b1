"""
Reduction of the KL score to an inner product over augmented vectors.

Query:    [1, Π_q, μ_q1², …, μ_qk², μ_q1, …, μ_qk]
Document: [γ_d, −1/Π_d, −1/σ_d1², …, −1/σ_dk², 2μ_d1/σ_d1², …, 2μ_dk/σ_dk²]

with Π = ∏σ² and the document prior γ_d = −Σ (log σ_di² + μ_di²/σ_di²).
Their dot product equals :func:`~mvn_retrieval.core.gaussian.rank_score`.

In ``trace`` mode the query vector becomes
[1, 0, μ_q1² + σ_q1², …, μ_qk² + σ_qk², μ_q1, …, μ_qk]; against the same
document vector the dot product equals
:func:`~mvn_retrieval.core.gaussian.kl_rank_score`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from ..errors import DimensionMismatchError, EmptyCorpusError, TransformRangeError
from .gaussian import GaussianEmbedding

# |Σ log σ²| above this (natural log) would push Π towards the double range limit.
LOG_SUM_GUARD = 600.0


class ScoringMode(str, Enum):
    PRODUCT = "product"
    TRACE = "trace"


@dataclass(frozen=True, eq=False)
class TransformedQuery:
    """Augmented query vector of length 2k+2."""

    vec: np.ndarray
    mode: ScoringMode = ScoringMode.PRODUCT

    @property
    def k(self) -> int:
        return (self.vec.size - 2) // 2


@dataclass(frozen=True, eq=False)
class TransformedDoc:
    """Augmented document vector of length 2k+2; ``prior`` is γ_d (== vec[0])."""

    id: str
    vec: np.ndarray
    prior: float

    @property
    def k(self) -> int:
        return (self.vec.size - 2) // 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransformedDoc):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.vec, other.vec)

    def __hash__(self) -> int:
        return hash(self.id)


def _guard(embedding: GaussianEmbedding) -> float:
    log_sum = embedding.log_variance_sum
    if abs(log_sum) > LOG_SUM_GUARD:
        raise TransformRangeError(
            f"log-variance sum {log_sum:.3f} of {embedding.id} is outside "
            f"±{LOG_SUM_GUARD:g}; the variance product is not representable"
        )
    return log_sum


def transform_query(
    q: GaussianEmbedding,
    mode: Union[ScoringMode, str] = ScoringMode.PRODUCT,
) -> TransformedQuery:
    """Build the augmented query vector."""
    mode = ScoringMode(mode)
    log_sum = _guard(q)
    k = q.k
    vec = np.empty(2 * k + 2, dtype=np.float64)
    vec[0] = 1.0
    squares = q.mean * q.mean
    if mode is ScoringMode.PRODUCT:
        vec[1] = np.exp(log_sum)
        vec[2 : 2 + k] = squares
    else:
        vec[1] = 0.0
        vec[2 : 2 + k] = squares + q.variance
    vec[2 + k :] = q.mean
    vec.flags.writeable = False
    return TransformedQuery(vec, mode)


def document_prior(d: GaussianEmbedding) -> float:
    """γ_d = −Σ (log σ_di² + μ_di²/σ_di²); query independent."""
    return -float(np.sum(np.log(d.variance) + d.mean * d.mean / d.variance))


def transform_doc(d: GaussianEmbedding) -> TransformedDoc:
    """Build the augmented document vector and its prior."""
    log_sum = _guard(d)
    k = d.k
    inverse = 1.0 / d.variance
    prior = document_prior(d)
    vec = np.empty(2 * k + 2, dtype=np.float64)
    vec[0] = prior
    vec[1] = -np.exp(-log_sum)
    vec[2 : 2 + k] = -inverse
    vec[2 + k :] = 2.0 * d.mean * inverse
    vec.flags.writeable = False
    return TransformedDoc(d.id, vec, prior)


def transform_docs(docs: Sequence[GaussianEmbedding]) -> np.ndarray:
    """Stack the augmented vectors of ``docs`` into an (n, 2k+2) matrix."""
    if not docs:
        raise EmptyCorpusError("empty corpus")
    return np.vstack([transform_doc(d).vec for d in docs])


def dot_score(tq: TransformedQuery, td: TransformedDoc) -> float:
    """Inner product of an augmented query and document vector."""
    if tq.vec.size != td.vec.size:
        raise DimensionMismatchError(
            f"augmented lengths differ: query {tq.vec.size}, document {td.vec.size}"
        )
    return float(np.dot(tq.vec, td.vec))


__all__ = [
    "LOG_SUM_GUARD",
    "ScoringMode",
    "TransformedQuery",
    "TransformedDoc",
    "transform_query",
    "transform_doc",
    "transform_docs",
    "document_prior",
    "dot_score",
]
