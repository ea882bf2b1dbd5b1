"""
Pre-retrieval query performance prediction from the query variance vector,
and the two correlation measures used to judge a predictor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from ..core.gaussian import GaussianEmbedding
from ..errors import ContractViolation, UndefinedResultError
from ..utils.validators import as_finite_vector, require_same_length


class QppReduction(str, Enum):
    L2 = "l2"
    LOG_DET = "log_det"
    TRACE = "trace"


def qpp_predictor(q: GaussianEmbedding, reduction: Union[QppReduction, str] = QppReduction.L2) -> float:
    """
    Reduce a query's variance vector to one predictor value.

    ``l2``: ‖σ²‖₂ (also the Frobenius norm of the diagonal covariance);
    ``log_det``: Σ log σ², the log-determinant; ``trace``: Σ σ².
    """
    reduction = QppReduction(reduction)
    if reduction is QppReduction.L2:
        return float(np.linalg.norm(q.variance))
    if reduction is QppReduction.LOG_DET:
        return q.log_variance_sum
    return float(np.sum(q.variance))


def _paired(xs: Sequence[float], ys: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    require_same_length(xs, ys, "correlation inputs")
    if len(xs) < 2:
        raise ContractViolation("correlation needs at least 2 observations")
    return as_finite_vector(xs, "xs"), as_finite_vector(ys, "ys")


def _pearsonr(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    x, y = _paired(xs, ys)
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise UndefinedResultError("Pearson correlation is undefined for a constant input")
    result = stats.pearsonr(x, y)
    return float(result[0]), float(result[1])


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation."""
    return _pearsonr(xs, ys)[0]


def pearson_test(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Pearson ρ and its two-sided p-value (1.0 for two observations)."""
    return _pearsonr(xs, ys)


def kendall_tau(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Kendall τ-b (tie-corrected)."""
    x, y = _paired(xs, ys)
    tau, _ = stats.kendalltau(x, y, variant="b")
    if not math.isfinite(tau):
        raise UndefinedResultError("Kendall tau is undefined when one input is constant")
    return float(tau)


@dataclass(frozen=True)
class QppRecord:
    query_id: str
    predictor: float
    effectiveness: float


@dataclass(frozen=True)
class QppReport:
    records: List[QppRecord]
    pearson: float
    p_value: float
    kendall: float


def qpp_study(
    queries: Sequence[GaussianEmbedding],
    effectiveness: Mapping[str, float],
    reduction: Union[QppReduction, str] = QppReduction.L2,
) -> QppReport:
    """
    Correlate the predictor with per-query effectiveness.

    Only queries present in both inputs are used, in sorted id order.
    """
    by_id: Dict[str, GaussianEmbedding] = {q.id: q for q in queries}
    shared = sorted(set(by_id) & set(effectiveness))
    if len(shared) < 2:
        raise ContractViolation(
            f"need at least 2 queries with both an embedding and a metric value, got {len(shared)}"
        )
    records = [
        QppRecord(qid, qpp_predictor(by_id[qid], reduction), float(effectiveness[qid]))
        for qid in shared
    ]
    predictors = [r.predictor for r in records]
    values = [r.effectiveness for r in records]
    rho, p_value = pearson_test(predictors, values)
    return QppReport(records, rho, p_value, kendall_tau(predictors, values))


__all__ = [
    "QppReduction",
    "QppRecord",
    "QppReport",
    "qpp_predictor",
    "pearson",
    "pearson_test",
    "kendall_tau",
    "qpp_study",
]
