"""
Ranking metrics: MRR@10, NDCG@10, MAP over the top 1000.

A run maps query ids to ranked documents (either doc ids or
:class:`~mvn_retrieval.evaluation.trec.RunRecord` objects, best first).
Per-query values are computed in sorted query order and averaged with
``math.fsum``, so results do not depend on the order of queries in a run
or on how many workers :func:`evaluate` uses.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

from ..errors import ContractViolation

METRIC_NAMES = ("mrr@10", "ndcg@10", "map")


def _doc_ids(ranking: Sequence) -> List[str]:
    return [getattr(item, "doc_id", item) for item in ranking]


def _check_coverage(run: Mapping[str, Sequence], qrels: Mapping[str, Mapping[str, int]]) -> None:
    unjudged = sorted(set(run) - set(qrels))
    if unjudged:
        raise ContractViolation(
            f"{len(unjudged)} run queries have no relevance judgments, e.g. {unjudged[0]}"
        )


def _mean(per_query: Mapping[str, float]) -> float:
    if not per_query:
        return 0.0
    return math.fsum(per_query[qid] for qid in sorted(per_query)) / len(per_query)


def reciprocal_rank(ranking: Sequence, judged: Mapping[str, int], cutoff: int = 10) -> float:
    for rank, doc_id in enumerate(_doc_ids(ranking)[:cutoff], 1):
        if judged.get(doc_id, 0) >= 1:
            return 1.0 / rank
    return 0.0


def ndcg(ranking: Sequence, judged: Mapping[str, int], cutoff: int = 10) -> float:
    """NDCG with gain 2^grade − 1 and log2(rank + 1) discount."""
    dcg = math.fsum(
        (2.0 ** judged.get(doc_id, 0) - 1.0) / math.log2(rank + 1)
        for rank, doc_id in enumerate(_doc_ids(ranking)[:cutoff], 1)
    )
    ideal = sorted(judged.values(), reverse=True)[:cutoff]
    idcg = math.fsum((2.0 ** grade - 1.0) / math.log2(rank + 1) for rank, grade in enumerate(ideal, 1))
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def average_precision(
    ranking: Sequence,
    judged: Mapping[str, int],
    cutoff: int = 1000,
    threshold: int = 1,
) -> float:
    """Average precision over the top ``cutoff``; relevant means grade >= ``threshold``."""
    total_relevant = sum(1 for grade in judged.values() if grade >= threshold)
    if total_relevant == 0:
        return 0.0
    hits = 0
    precisions = []
    for rank, doc_id in enumerate(_doc_ids(ranking)[:cutoff], 1):
        if judged.get(doc_id, 0) >= threshold:
            hits += 1
            precisions.append(hits / rank)
    return math.fsum(precisions) / total_relevant


def per_query_mrr_at_10(run, qrels) -> Dict[str, float]:
    _check_coverage(run, qrels)
    return {qid: reciprocal_rank(run[qid], qrels[qid]) for qid in sorted(run)}


def per_query_ndcg_at_10(run, qrels) -> Dict[str, float]:
    _check_coverage(run, qrels)
    return {qid: ndcg(run[qid], qrels[qid]) for qid in sorted(run)}


def per_query_map(run, qrels, threshold: int = 1) -> Dict[str, float]:
    _check_coverage(run, qrels)
    return {
        qid: average_precision(run[qid], qrels[qid], threshold=threshold) for qid in sorted(run)
    }


def mrr_at_10(run, qrels) -> float:
    """Mean reciprocal rank of the first relevant document within the top 10."""
    return _mean(per_query_mrr_at_10(run, qrels))


def ndcg_at_10(run, qrels) -> float:
    """Mean NDCG@10."""
    return _mean(per_query_ndcg_at_10(run, qrels))


def map_at_1000(run, qrels, threshold: int = 1) -> float:
    """Mean average precision over the top 1000 documents."""
    return _mean(per_query_map(run, qrels, threshold))


@dataclass
class EvaluationReport:
    """Mean and per-query values of every metric."""

    means: Dict[str, float] = field(default_factory=dict)
    per_query: Dict[str, Dict[str, float]] = field(default_factory=dict)

    @property
    def num_queries(self) -> int:
        return len(next(iter(self.per_query.values()), {}))


def evaluate(run, qrels, map_threshold: int = 1, workers: int = 1) -> EvaluationReport:
    """
    Compute every metric for a run.

    Queries are scored on ``workers`` threads; values are gathered in
    sorted query order, so the report is the same for any worker count.
    """
    if workers < 1:
        raise ContractViolation(f"workers must be positive, got {workers}")
    _check_coverage(run, qrels)
    qids = sorted(run)

    def score_one(qid: str) -> Tuple[float, float, float]:
        ranking, judged = run[qid], qrels[qid]
        return (
            reciprocal_rank(ranking, judged),
            ndcg(ranking, judged),
            average_precision(ranking, judged, threshold=map_threshold),
        )

    if workers == 1:
        values = [score_one(qid) for qid in qids]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(score_one, qids))
    per_query = {
        name: {qid: row[column] for qid, row in zip(qids, values)}
        for column, name in enumerate(METRIC_NAMES)
    }
    return EvaluationReport({name: _mean(per_query[name]) for name in METRIC_NAMES}, per_query)


__all__ = [
    "METRIC_NAMES",
    "reciprocal_rank",
    "ndcg",
    "average_precision",
    "mrr_at_10",
    "ndcg_at_10",
    "map_at_1000",
    "per_query_mrr_at_10",
    "per_query_ndcg_at_10",
    "per_query_map",
    "EvaluationReport",
    "evaluate",
]
