"""Finite-difference verification of the analytic training gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from ..core.transform import ScoringMode
from .encoder import EncoderParams
from .trainer import Candidate, TrainingInstance, batch_ranks, loss_and_gradients

# Coordinates smaller than this (times max(1, |loss|)) are compared absolutely.
RELATIVE_FLOOR = 1e-5


@dataclass
class GradientCheckResult:
    """
    Worst per-coordinate relative error |a − n| / max(|a|, |n|, floor) per
    weight matrix, where floor = RELATIVE_FLOOR · max(1, |loss|).
    """

    error_W_M: float
    error_W_S: float
    max_abs_error: float
    tolerance: float

    @property
    def max_error(self) -> float:
        return max(self.error_W_M, self.error_W_S)

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float) -> float:
    """Largest coordinate-wise relative error between two gradients."""
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


def numeric_gradients(
    params: EncoderParams,
    batch: Sequence[TrainingInstance],
    ranks: Sequence[np.ndarray],
    h: float = 1e-5,
    scoring: Union[ScoringMode, str] = ScoringMode.PRODUCT,
    in_batch_negatives: bool = False,
):
    """Central differences of the batch loss with the rank weights held at ``ranks``."""
    grads = []
    for name in ("W_M", "W_S"):
        weights = getattr(params, name)
        grad = np.zeros_like(weights)
        for idx in np.ndindex(weights.shape):
            shifted = []
            for sign in (1.0, -1.0):
                shifted_params = params.copy()
                getattr(shifted_params, name)[idx] += sign * h
                loss, _, _ = loss_and_gradients(shifted_params, batch, scoring, in_batch_negatives, ranks)
                shifted.append(loss)
            grad[idx] = (shifted[0] - shifted[1]) / (2.0 * h)
        grads.append(grad)
    return grads[0], grads[1]


def check_gradients(
    params: EncoderParams,
    batch: Sequence[TrainingInstance],
    h: float = 1e-5,
    tolerance: float = 1e-4,
    scoring: Union[ScoringMode, str] = ScoringMode.PRODUCT,
    in_batch_negatives: bool = False,
) -> GradientCheckResult:
    """Compare analytic and central-difference gradients of the batch loss."""
    ranks = batch_ranks(params, batch, scoring, in_batch_negatives)
    loss, a_wm, a_ws = loss_and_gradients(params, batch, scoring, in_batch_negatives, ranks)
    n_wm, n_ws = numeric_gradients(params, batch, ranks, h, scoring, in_batch_negatives)
    floor = RELATIVE_FLOOR * max(1.0, abs(loss))
    return GradientCheckResult(
        relative_error(a_wm, n_wm, floor),
        relative_error(a_ws, n_ws, floor),
        float(max(np.max(np.abs(a_wm - n_wm)), np.max(np.abs(a_ws - n_ws)))),
        tolerance,
    )


def random_problem(
    seed: int,
    m: int = 3,
    k: int = 2,
    n_candidates: int = 2,
    n_queries: int = 1,
    beta: float = 1.0,
    scale: float = 0.5,
):
    """A small random encoder and batch with distinct teacher scores."""
    rng = np.random.default_rng(seed)
    params = EncoderParams.initialize(m, k, beta, scale, rng)
    batch: List[TrainingInstance] = []
    for q in range(n_queries):
        teacher = rng.permutation(n_candidates).astype(np.float64)
        candidates = [
            Candidate(f"q{q}d{j}", rng.standard_normal(m), float(teacher[j]), j == 0)
            for j in range(n_candidates)
        ]
        batch.append(TrainingInstance(f"q{q}", rng.standard_normal(m), tuple(candidates)))
    return params, batch


def run_gradient_check(
    seeds: Optional[Sequence[int]] = None,
    m: int = 3,
    k: int = 2,
    n_candidates: int = 2,
    scoring: Union[ScoringMode, str] = ScoringMode.PRODUCT,
    h: float = 1e-5,
    tolerance: float = 1e-4,
) -> List[GradientCheckResult]:
    """Check gradients on one random problem per seed."""
    results = []
    for seed in seeds if seeds is not None else range(20):
        params, batch = random_problem(seed, m, k, n_candidates)
        results.append(check_gradients(params, batch, h, tolerance, scoring))
    return results


__all__ = [
    "RELATIVE_FLOOR",
    "GradientCheckResult",
    "relative_error",
    "numeric_gradients",
    "check_gradients",
    "random_problem",
    "run_gradient_check",
]
