"""
Base index class.

Every index stores the augmented document vectors of one corpus in a single
contiguous float64 matrix (one row per document, 2k+2 columns) plus the id
table, and answers top-k inner-product queries with a deterministic order:
score descending, ties broken by ascending document id.

Subclasses differ only in how they pick the candidate rows to score:
the flat index scores every row, the graph index walks a proximity graph.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.gaussian import GaussianEmbedding
from ..core.transform import TransformedDoc, TransformedQuery, transform_doc
from ..errors import (
    ContractViolation,
    DimensionMismatchError,
    DuplicateIdError,
    EmptyCorpusError,
)
from ..utils.logger import get_logger


@dataclass(frozen=True)
class SearchResult:
    """One retrieved document; ``score`` is the inner product (the rank score)."""

    doc_id: str
    score: float


@dataclass(frozen=True)
class IndexParams:
    """Graph construction and search parameters."""

    M: int = 16
    ef_construction: int = 200
    ef_search: int = 100
    seed: Optional[int] = 42

    def __post_init__(self) -> None:
        if self.M < 2:
            raise ContractViolation(f"M must be at least 2, got {self.M}")
        if self.ef_construction < 1 or self.ef_search < 1:
            raise ContractViolation("ef_construction and ef_search must be positive")


def inner_products(rows: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Row-wise inner products; each row is reduced independently of the others."""
    return np.sum(rows * vec, axis=1)


def prepare_corpus(docs: Sequence[GaussianEmbedding]) -> Tuple[List[str], np.ndarray]:
    """
    Validate a corpus and transform it.

    Returns:
        (ids, vectors) with vectors of shape (n, 2k+2)

    Raises:
        EmptyCorpusError, DuplicateIdError, DimensionMismatchError
    """
    if not docs:
        raise EmptyCorpusError("empty corpus")
    k = docs[0].k
    seen = set()
    ids: List[str] = []
    rows = []
    for doc in docs:
        if doc.k != k:
            raise DimensionMismatchError(
                f"document {doc.id} has k={doc.k}, corpus has k={k}"
            )
        if doc.id in seen:
            raise DuplicateIdError(doc.id)
        seen.add(doc.id)
        ids.append(doc.id)
        rows.append(transform_doc(doc).vec)
    return ids, np.vstack(rows)


class BaseIndex(ABC):
    """Abstract base class for document indexes over augmented vectors."""

    kind: str = "base"

    def __init__(self, ids: Sequence[str], vectors: np.ndarray):
        """
        Initialize an index from already-transformed rows.

        Args:
            ids: Document ids, one per row, unique
            vectors: Float64 matrix of shape (n, 2k+2)
        """
        vectors = np.ascontiguousarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(ids) or vectors.shape[1] % 2:
            raise ContractViolation(
                f"vectors of shape {vectors.shape} do not match {len(ids)} ids"
            )
        vectors.flags.writeable = False
        self.ids: List[str] = list(ids)
        self.vectors = vectors
        self.k = (vectors.shape[1] - 2) // 2
        # position of each row in ascending-id order, used as the tie-break key
        self._id_rank = np.empty(len(self.ids), dtype=np.int64)
        self._id_rank[np.argsort(np.array(self.ids), kind="stable")] = np.arange(len(self.ids))
        self.logger = get_logger(self.__class__.__name__)

    @classmethod
    @abstractmethod
    def build(cls, docs: Sequence[GaussianEmbedding], params: Optional[IndexParams] = None) -> "BaseIndex":
        """Transform and index ``docs``."""

    @abstractmethod
    def _candidates(self, tq: TransformedQuery, top_k: int, ef_search: Optional[int]) -> np.ndarray:
        """Row numbers worth scoring for this query."""

    def search(
        self,
        tq: TransformedQuery,
        top_k: int,
        ef_search: Optional[int] = None,
    ) -> List[SearchResult]:
        """
        Return the top ``top_k`` documents for an augmented query.

        A ``top_k`` larger than the corpus returns the whole corpus.
        """
        if top_k < 1:
            raise ContractViolation(f"top_k must be at least 1, got {top_k}")
        if tq.vec.size != self.vectors.shape[1]:
            raise DimensionMismatchError(
                f"query has augmented length {tq.vec.size}, index expects "
                f"{self.vectors.shape[1]} (k={self.k})"
            )
        rows = self._candidates(tq, top_k, ef_search)
        return self._ranked(rows, tq.vec, top_k)

    def _ranked(self, rows: np.ndarray, qvec: np.ndarray, top_k: int) -> List[SearchResult]:
        scores = inner_products(self.vectors[rows], qvec)
        order = np.lexsort((self._id_rank[rows], -scores))[:top_k]
        return [SearchResult(self.ids[rows[i]], float(scores[i])) for i in order]

    def document(self, position: int) -> TransformedDoc:
        vec = self.vectors[position]
        return TransformedDoc(self.ids[position], vec, float(vec[0]))

    def documents(self) -> Iterable[TransformedDoc]:
        return (self.document(i) for i in range(len(self)))

    def __len__(self) -> int:
        return len(self.ids)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BaseIndex):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.ids == other.ids
            and np.array_equal(self.vectors, other.vectors)
        )

    def persist(self, path: str) -> None:
        """Write this index to ``path`` in the MVNR binary format."""
        from .storage import save_index

        save_index(self, path)
