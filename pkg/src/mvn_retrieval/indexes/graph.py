"""
Layered proximity-graph index (HNSW-style) over augmented document vectors.

Similarity is the inner product, higher is closer. Document vectors live in
the "document side" of the reduction and are not comparable with each other,
so construction probes the graph with each document's query-side vector:
the similarity of document a to document b is ``probe(a) · vec(b)``, the
rank score of b when a is used as the query.

Edges are undirected. Every edge is stored in both adjacency lists, and
pruning removes an edge from both ends, so the layers stay symmetric. A
node never loses its last edge to pruning. Degrees are capped at M
(2M on layer 0).
"""

from __future__ import annotations

import heapq
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.gaussian import GaussianEmbedding
from ..core.transform import TransformedQuery, transform_query
from ..utils.logger import get_logger
from .base import BaseIndex, IndexParams, prepare_corpus

Layer = Dict[int, List[int]]


def _greedy(probe: np.ndarray, entry: int, layer: Layer, vectors: np.ndarray) -> int:
    """Hill-climb to the most similar node reachable from ``entry``."""
    best = entry
    best_sim = float(vectors[entry] @ probe)
    while True:
        neighbors = layer[best]
        if not neighbors:
            return best
        sims = vectors[neighbors] @ probe
        j = int(np.argmax(sims))
        if sims[j] <= best_sim:
            return best
        best, best_sim = neighbors[j], float(sims[j])


def _search_layer(
    probe: np.ndarray,
    entry_points: List[int],
    layer: Layer,
    ef: int,
    vectors: np.ndarray,
) -> List[Tuple[float, int]]:
    """
    Beam search of one layer.

    Returns:
        Up to ``ef`` (similarity, node) pairs, most similar first
    """
    visited = set(entry_points)
    entry_sims = (vectors[entry_points] @ probe).tolist()
    candidates = [(-s, node) for s, node in zip(entry_sims, entry_points)]
    heapq.heapify(candidates)
    results = [(s, node) for s, node in zip(entry_sims, entry_points)]
    heapq.heapify(results)
    while len(results) > ef:
        heapq.heappop(results)

    while candidates:
        neg_sim, node = heapq.heappop(candidates)
        if len(results) >= ef and -neg_sim < results[0][0]:
            break
        fresh = [n for n in layer[node] if n not in visited]
        if not fresh:
            continue
        visited.update(fresh)
        for n, s in zip(fresh, (vectors[fresh] @ probe).tolist()):
            if len(results) < ef or s > results[0][0]:
                heapq.heappush(candidates, (-s, n))
                heapq.heappush(results, (s, n))
                if len(results) > ef:
                    heapq.heappop(results)
    return sorted(results, key=lambda pair: (-pair[0], pair[1]))


class _GraphBuilder:
    """Inserts documents one by one; exclusive, single-threaded."""

    def __init__(self, vectors: np.ndarray, probes: np.ndarray, params: IndexParams, logger):
        self.vectors = vectors
        self.probes = probes
        self.M = params.M
        self.M0 = 2 * params.M
        self.ef = params.ef_construction
        self.level_mult = 1.0 / math.log(params.M)
        self.rng = np.random.default_rng(params.seed)
        self.layers: List[Layer] = []
        self.entry = -1
        self.logger = logger

    def run(self) -> Tuple[List[Layer], int]:
        total = self.vectors.shape[0]
        for node in range(total):
            self.insert(node)
            if (node + 1) % 1000 == 0:
                self.logger.info(f"Inserted {node + 1}/{total} documents")
        return self.layers, self.entry

    def insert(self, node: int) -> None:
        level = int(-math.log(1.0 - self.rng.random()) * self.level_mult)
        if self.entry < 0:
            self.layers = [{node: []} for _ in range(level + 1)]
            self.entry = node
            return

        probe = self.probes[node]
        top = len(self.layers) - 1
        entry = self.entry
        for lc in range(top, level, -1):
            entry = _greedy(probe, entry, self.layers[lc], self.vectors)

        entry_points = [entry]
        for lc in range(min(level, top), -1, -1):
            layer = self.layers[lc]
            cap = self.M0 if lc == 0 else self.M
            found = _search_layer(probe, entry_points, layer, self.ef, self.vectors)
            selected = self._select(found, cap)
            layer[node] = list(selected)
            for neighbor in selected:
                layer[neighbor].append(node)
            for neighbor in selected:
                if len(layer[neighbor]) > cap:
                    self._shrink(neighbor, layer, cap)
            entry_points = [n for _, n in found]

        for _ in range(top + 1, level + 1):
            self.layers.append({node: []})
        if level > top:
            self.entry = node

    def _select(self, candidates: List[Tuple[float, int]], cap: int) -> List[int]:
        """Diversity heuristic, then back-fill with pruned candidates up to ``cap``."""
        if len(candidates) <= cap:
            return [n for _, n in candidates]
        kept: List[int] = []
        pruned: List[int] = []
        for sim, n in candidates:
            if len(kept) >= cap:
                break
            if kept and float(np.max(self.vectors[kept] @ self.probes[n])) > sim:
                pruned.append(n)
                continue
            kept.append(n)
        for n in pruned:
            if len(kept) >= cap:
                break
            kept.append(n)
        return kept

    def _shrink(self, node: int, layer: Layer, cap: int) -> None:
        neighbors = layer[node]
        sims = (self.vectors[neighbors] @ self.probes[node]).tolist()
        ranked = sorted(zip(sims, neighbors), key=lambda pair: (-pair[0], pair[1]))
        # neighbours whose only edge is this one are kept so nobody is orphaned
        forced = [n for _, n in ranked if len(layer[n]) == 1]
        if len(forced) >= cap:
            keep = forced[:cap]
        else:
            rest = [(s, n) for s, n in ranked if len(layer[n]) != 1]
            keep = forced + self._select(rest, cap - len(forced))
        keep_set = set(keep)
        for n in neighbors:
            if n not in keep_set:
                layer[n].remove(node)
        layer[node] = keep


class GraphIndex(BaseIndex):
    """Approximate top-k inner-product search over a layered proximity graph."""

    kind = "graph"

    def __init__(
        self,
        ids: Sequence[str],
        vectors: np.ndarray,
        params: IndexParams,
        layers: List[Layer],
        entry_point: int,
    ):
        super().__init__(ids, vectors)
        self.params = params
        self.layers = layers
        self.entry_point = entry_point

    @classmethod
    def build(cls, docs: Sequence[GaussianEmbedding], params: Optional[IndexParams] = None) -> "GraphIndex":
        """
        Build the graph; deterministic for a given ``params.seed``.

        Args:
            docs: Nonempty corpus with unique ids and one dimension k
            params: M, ef_construction, ef_search and the level seed
        """
        params = params or IndexParams()
        ids, vectors = prepare_corpus(docs)
        probes = np.vstack([transform_query(doc).vec for doc in docs])
        logger = get_logger(cls.__name__)
        layers, entry = _GraphBuilder(vectors, probes, params, logger).run()
        index = cls(ids, vectors, params, layers, entry)
        index.logger.info(
            f"Graph index built over {len(index)} documents "
            f"(k={index.k}, layers={len(layers)}, M={params.M})"
        )
        return index

    def _candidates(self, tq: TransformedQuery, top_k: int, ef_search: Optional[int]) -> np.ndarray:
        ef = max(ef_search or self.params.ef_search, top_k)
        entry = self.entry_point
        for lc in range(len(self.layers) - 1, 0, -1):
            entry = _greedy(tq.vec, entry, self.layers[lc], self.vectors)
        found = _search_layer(tq.vec, [entry], self.layers[0], ef, self.vectors)
        return np.array([n for _, n in found], dtype=np.int64)

    def check_invariants(self) -> List[str]:
        """Return a list of structural problems; empty when the graph is sound."""
        problems: List[str] = []
        n = len(self.ids)
        if not self.layers or len(self.layers[0]) != n:
            problems.append("layer 0 does not contain every node")
            return problems
        if self.entry_point not in self.layers[-1]:
            problems.append(f"entry point {self.entry_point} is not on the top layer")
        for level, layer in enumerate(self.layers):
            cap = 2 * self.params.M if level == 0 else self.params.M
            below = self.layers[level - 1] if level else None
            for node, neighbors in layer.items():
                if not 0 <= node < n:
                    problems.append(f"layer {level}: node {node} out of range")
                    continue
                if below is not None and node not in below:
                    problems.append(f"layer {level}: node {node} missing from layer {level - 1}")
                if len(neighbors) > cap:
                    problems.append(f"layer {level}: node {node} has degree {len(neighbors)} > {cap}")
                for neighbor in neighbors:
                    if neighbor not in layer or node not in layer[neighbor]:
                        problems.append(f"layer {level}: edge {node}-{neighbor} is not symmetric")
        return problems

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphIndex):
            return NotImplemented
        return (
            super().__eq__(other)
            and self.params == other.params
            and self.entry_point == other.entry_point
            and self.layers == other.layers
        )
