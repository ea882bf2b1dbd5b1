"""Exact flat index: scores every stored vector."""

from typing import Optional, Sequence

import numpy as np

from ..core.gaussian import GaussianEmbedding
from ..core.transform import TransformedQuery
from .base import BaseIndex, IndexParams, prepare_corpus


class FlatIndex(BaseIndex):
    """Exhaustive inner-product scan; the ranking oracle for the graph index."""

    kind = "flat"

    @classmethod
    def build(cls, docs: Sequence[GaussianEmbedding], params: Optional[IndexParams] = None) -> "FlatIndex":
        ids, vectors = prepare_corpus(docs)
        index = cls(ids, vectors)
        index.logger.info(f"Flat index built over {len(index)} documents (k={index.k})")
        return index

    def _candidates(self, tq: TransformedQuery, top_k: int, ef_search: Optional[int]) -> np.ndarray:
        return np.arange(len(self.ids))
