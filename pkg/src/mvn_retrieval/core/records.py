"""JSONL interchange for embeddings: ``{"id": ..., "mean": [...], "var": [...]}``."""

from __future__ import annotations

from typing import Iterable, List, Optional

import numpy as np

from ..errors import (
    DimensionMismatchError,
    EmbeddingValidationError,
    EmptyCorpusError,
    ParseError,
)
from ..utils.helpers import read_jsonl, write_jsonl
from .gaussian import GaussianEmbedding

# Ingested variances below this are rejected, never clamped.
VARIANCE_FLOOR = 1e-12


def parse_record(obj: dict, path: Optional[str] = None, line_no: Optional[int] = None) -> GaussianEmbedding:
    """Turn one decoded JSON object into a validated embedding."""
    missing = [key for key in ("id", "mean", "var") if key not in obj]
    if missing:
        raise ParseError(f"missing field(s): {', '.join(missing)}", path, line_no)
    record_id = str(obj["id"])
    embedding = GaussianEmbedding(record_id, obj["mean"], obj["var"])
    if np.any(embedding.variance < VARIANCE_FLOOR):
        raise EmbeddingValidationError(
            f"variance entry below floor {VARIANCE_FLOOR:g}", record_id
        )
    return embedding


def read_embeddings(path: str, allow_empty: bool = False) -> List[GaussianEmbedding]:
    """
    Read and validate an embedding JSONL file.

    All records must share one dimension k; the first record fixes it.

    Raises:
        ParseError: malformed line (with line number)
        EmbeddingValidationError: invariant violation (with record id)
        DimensionMismatchError: mixed k, naming both values
        EmptyCorpusError: no records and ``allow_empty`` is False
    """
    embeddings: List[GaussianEmbedding] = []
    k: Optional[int] = None
    for line_no, obj in read_jsonl(path):
        embedding = parse_record(obj, path, line_no)
        if k is None:
            k = embedding.k
        elif embedding.k != k:
            raise DimensionMismatchError(
                f"{path}:{line_no}: record {embedding.id} has k={embedding.k}, "
                f"expected k={k}"
            )
        embeddings.append(embedding)
    if not embeddings and not allow_empty:
        raise EmptyCorpusError(f"empty corpus: {path}")
    return embeddings


def embedding_to_record(embedding: GaussianEmbedding) -> dict:
    return {
        "id": embedding.id,
        "mean": embedding.mean.tolist(),
        "var": embedding.variance.tolist(),
    }


def write_embeddings(path: str, embeddings: Iterable[GaussianEmbedding]) -> int:
    """Write embeddings as JSONL; returns the number written."""
    return write_jsonl(path, (embedding_to_record(e) for e in embeddings))


__all__ = [
    "VARIANCE_FLOOR",
    "parse_record",
    "read_embeddings",
    "write_embeddings",
    "embedding_to_record",
]
