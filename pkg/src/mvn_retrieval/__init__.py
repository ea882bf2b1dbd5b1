"""
mvn-retrieval - dense retrieval with diagonal multivariate normal embeddings.
"""

__version__ = "0.1.0"
__author__ = "mvn-retrieval Team"

from .core import GaussianEmbedding, kl_divergence, rank_score, transform_doc, transform_query
from .indexes import FlatIndex, GraphIndex, load_index
from .main import RetrievalEngine

__all__ = [
    "RetrievalEngine",
    "GaussianEmbedding",
    "kl_divergence",
    "rank_score",
    "transform_query",
    "transform_doc",
    "FlatIndex",
    "GraphIndex",
    "load_index",
]
