"""Ranking evaluation and query performance prediction."""

from .metrics import EvaluationReport, evaluate, map_at_1000, mrr_at_10, ndcg_at_10
from .qpp import QppReduction, kendall_tau, pearson, pearson_test, qpp_predictor, qpp_study
from .trec import RunRecord, read_qrels, read_run, write_run

__all__ = [
    "EvaluationReport",
    "evaluate",
    "mrr_at_10",
    "ndcg_at_10",
    "map_at_1000",
    "QppReduction",
    "qpp_predictor",
    "qpp_study",
    "pearson",
    "pearson_test",
    "kendall_tau",
    "RunRecord",
    "read_qrels",
    "read_run",
    "write_run",
]
