"""Document indexes over augmented vectors."""

from typing import Optional, Sequence

from ..core.gaussian import GaussianEmbedding
from ..errors import ContractViolation
from .base import BaseIndex, IndexParams, SearchResult
from .flat import FlatIndex
from .graph import GraphIndex
from .storage import load_index, save_index

AVAILABLE_INDEXES = {
    "flat": FlatIndex,
    "graph": GraphIndex,
}


def build_index(
    docs: Sequence[GaussianEmbedding],
    kind: str = "graph",
    params: Optional[IndexParams] = None,
) -> BaseIndex:
    """Build an index of the given kind (``flat`` or ``graph``)."""
    index_class = AVAILABLE_INDEXES.get(kind.lower())
    if index_class is None:
        raise ContractViolation(
            f"unknown index kind: {kind}. Valid kinds: {sorted(AVAILABLE_INDEXES)}"
        )
    return index_class.build(docs, params)


__all__ = [
    "AVAILABLE_INDEXES",
    "BaseIndex",
    "FlatIndex",
    "GraphIndex",
    "IndexParams",
    "SearchResult",
    "build_index",
    "load_index",
    "save_index",
]
