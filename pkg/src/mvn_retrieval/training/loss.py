"""
Listwise distillation loss.

For every ordered pair (d, d′) with teacher(d) > teacher(d′):

    |1/π(d) − 1/π(d′)| · log(1 + exp(y(d′) − y(d)))

where π is the student's rank and y the student's score. The rank weights
are constants with respect to the scores.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
from scipy.special import expit

from ..errors import ContractViolation
from ..utils.validators import require_same_length


def ranks_from_scores(scores) -> np.ndarray:
    """1-based ranks by descending score, ties broken by candidate order."""
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((np.arange(scores.size), -scores))
    ranks = np.empty(scores.size, dtype=np.int64)
    ranks[order] = np.arange(1, scores.size + 1)
    return ranks


def _validated(student_scores, teacher_scores, student_ranks):
    n = require_same_length(student_scores, teacher_scores, "student and teacher scores")
    require_same_length(student_scores, student_ranks, "scores and ranks")
    if n < 2:
        raise ContractViolation(f"need at least 2 candidates, got {n}")
    student = np.asarray(student_scores, dtype=np.float64)
    teacher = np.asarray(teacher_scores, dtype=np.float64)
    ranks = np.asarray(student_ranks)
    if not np.array_equal(np.sort(ranks), np.arange(1, n + 1)):
        raise ContractViolation("student ranks are not a permutation of 1..n")
    if not np.all(np.isfinite(student)):
        raise ContractViolation("student scores contain non-finite values")
    if np.any(np.isnan(teacher)) or np.any(teacher == np.inf):
        raise ContractViolation("teacher scores must be finite or −inf")
    return student, teacher, ranks.astype(np.float64)


def _pairs(student: np.ndarray, teacher: np.ndarray, ranks: np.ndarray):
    mask = teacher[:, None] > teacher[None, :]
    inverse = 1.0 / ranks
    weights = np.abs(inverse[:, None] - inverse[None, :]) * mask
    margins = student[None, :] - student[:, None]  # y(d′) − y(d)
    return mask, weights, margins


def distill_loss(student_scores, teacher_scores, student_ranks) -> float:
    """Loss of one query's candidate list; always >= 0."""
    student, teacher, ranks = _validated(student_scores, teacher_scores, student_ranks)
    mask, weights, margins = _pairs(student, teacher, ranks)
    if not mask.any():
        return 0.0
    return float(np.sum(weights[mask] * np.logaddexp(0.0, margins[mask])))


def distill_loss_and_grad(student_scores, teacher_scores, student_ranks) -> Tuple[float, np.ndarray]:
    """Loss and its gradient with respect to the student scores."""
    student, teacher, ranks = _validated(student_scores, teacher_scores, student_ranks)
    mask, weights, margins = _pairs(student, teacher, ranks)
    if not mask.any():
        return 0.0, np.zeros_like(student)
    loss = float(np.sum(weights[mask] * np.logaddexp(0.0, margins[mask])))
    pull = np.where(mask, weights * expit(margins), 0.0)
    # row index is d (pushed up), column index is d′ (pushed down)
    grad = pull.sum(axis=0) - pull.sum(axis=1)
    return loss, grad


__all__ = ["ranks_from_scores", "distill_loss", "distill_loss_and_grad"]
