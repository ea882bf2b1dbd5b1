"""Gaussian representations, KL scoring and the inner-product reduction."""

from .gaussian import (
    GaussianEmbedding,
    kl_divergence,
    kl_rank_score,
    log_pdf,
    pdf,
    rank_score,
)
from .transform import (
    ScoringMode,
    TransformedDoc,
    TransformedQuery,
    dot_score,
    transform_doc,
    transform_docs,
    transform_query,
)

__all__ = [
    "GaussianEmbedding",
    "pdf",
    "log_pdf",
    "kl_divergence",
    "rank_score",
    "kl_rank_score",
    "ScoringMode",
    "TransformedQuery",
    "TransformedDoc",
    "transform_query",
    "transform_doc",
    "transform_docs",
    "dot_score",
]
