"""
Training loop for the toy encoder.

Each step samples a batch of queries, builds every query's candidate list
D_q (positives, first-stage negatives, the student's own hard negatives),
optionally appends in-batch negatives, and takes one SGD step on the mean
listwise distillation loss. Student scores are the product-form rank score
(or the exact-KL trace form), differentiated analytically through the
encoder heads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..config.settings import TrainingSettings
from ..core.transform import ScoringMode, transform_query
from ..errors import ContractViolation, TrainingError
from ..indexes.flat import FlatIndex
from ..utils.logger import get_logger
from .data import FeatureTable, TrainingData
from .encoder import EncoderParams, encode_batch, softplus, softplus_grad
from .loss import distill_loss_and_grad, ranks_from_scores


@dataclass(frozen=True, eq=False)
class Candidate:
    doc_id: str
    features: np.ndarray
    teacher_score: float
    is_positive: bool = False


@dataclass(frozen=True, eq=False)
class TrainingInstance:
    """
    One query and its candidate list.

    ``relevant`` and ``known_scores`` describe the query beyond the sampled
    candidates; in-batch negatives use them to skip judged-relevant
    documents and to pick up teacher scores when they exist.
    """

    query_id: str
    query_features: np.ndarray
    candidates: Tuple[Candidate, ...]
    relevant: FrozenSet[str] = frozenset()
    known_scores: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if len(self.candidates) < 2:
            raise ContractViolation(
                f"query {self.query_id}: need at least 2 candidates, got {len(self.candidates)}"
            )
        m = np.asarray(self.query_features).size
        for c in self.candidates:
            if not math.isfinite(c.teacher_score):
                raise ContractViolation(f"query {self.query_id}: teacher score of {c.doc_id} is not finite")
            if np.asarray(c.features).size != m:
                raise ContractViolation(f"query {self.query_id}: {c.doc_id} has a different feature length")

    @property
    def doc_ids(self) -> List[str]:
        return [c.doc_id for c in self.candidates]


def _dedup(ids: Sequence[str], exclude: FrozenSet[str]) -> Tuple[str, ...]:
    seen = set(exclude)
    kept = []
    for doc_id in ids:
        if doc_id not in seen:
            seen.add(doc_id)
            kept.append(doc_id)
    return tuple(kept)


@dataclass(frozen=True)
class CandidatePool:
    """
    Where each query's candidates come from.

    First-stage and hard pools never contain the query's positives, nor
    duplicates. ``m_positive`` of 0 means every positive is used.
    """

    positives: Mapping[str, Tuple[str, ...]]
    bm25_pool: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    hard_pool: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    m_bm25: int = 4
    m_hard: int = 4
    m_positive: int = 4
    refreshed_at: Optional[int] = None

    def __post_init__(self) -> None:
        for name in ("m_bm25", "m_hard", "m_positive"):
            if getattr(self, name) < 0:
                raise ContractViolation(f"{name} must be non-negative, got {getattr(self, name)}")
        positives = {qid: _dedup(ids, frozenset()) for qid, ids in self.positives.items()}
        object.__setattr__(self, "positives", positives)
        for name in ("bm25_pool", "hard_pool"):
            pools = {
                qid: _dedup(ids, frozenset(positives.get(qid, ())))
                for qid, ids in getattr(self, name).items()
            }
            object.__setattr__(self, name, pools)

    @classmethod
    def from_data(cls, data: TrainingData, settings: TrainingSettings) -> "CandidatePool":
        positives = {
            qid: [doc_id for doc_id, grade in judged.items() if grade >= 1]
            for qid, judged in data.qrels.items()
        }
        return cls(
            positives,
            data.bm25_pools,
            {},
            settings.m_bm25,
            settings.m_hard,
            settings.m_positive,
        )

    def with_hard_pool(self, hard_pool: Mapping[str, Sequence[str]], step: int) -> "CandidatePool":
        return replace(self, hard_pool=hard_pool, refreshed_at=step)

    @staticmethod
    def _pick(ids: Sequence[str], count: int, rng: np.random.Generator) -> List[str]:
        if count == 0 or len(ids) <= count:
            return list(ids)
        return [ids[i] for i in sorted(rng.choice(len(ids), size=count, replace=False))]

    def sample(self, query_id: str, rng: np.random.Generator) -> List[str]:
        """Candidate ids for one query: positives first, then first-stage, then hard negatives."""
        positives = self._pick(self.positives.get(query_id, ()), self.m_positive, rng)
        chosen = list(positives)
        if self.m_bm25:
            chosen += self._pick(self.bm25_pool.get(query_id, ()), self.m_bm25, rng)
        if self.m_hard:
            taken = set(chosen)
            hard = [d for d in self.hard_pool.get(query_id, ()) if d not in taken]
            chosen += self._pick(hard, self.m_hard, rng)
        return chosen


@dataclass
class StepResult:
    params: EncoderParams
    loss: float
    grad_norm: float
    clipped: bool = False


def learning_rate(step: int, base_lr: float, warmup_steps: int, total_steps: int) -> float:
    """Linear warmup over ``warmup_steps``, then linear decay reaching 0 at ``total_steps``."""
    if warmup_steps > 0 and step < warmup_steps:
        return base_lr * (step + 1) / warmup_steps
    remaining = total_steps - warmup_steps
    if remaining <= 0:
        return base_lr
    return base_lr * max(0.0, (total_steps - step) / remaining)


def _expand(
    batch: Sequence[TrainingInstance],
    in_batch_negatives: bool,
) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Per instance: (query features, candidate feature matrix, teacher scores)."""
    first_positives: List[Candidate] = []
    for instance in batch:
        positive = next((c for c in instance.candidates if c.is_positive), None)
        if positive is not None:
            first_positives.append(positive)

    expanded = []
    for instance in batch:
        features = [np.asarray(c.features, dtype=np.float64) for c in instance.candidates]
        teacher = [c.teacher_score for c in instance.candidates]
        if in_batch_negatives:
            present = set(instance.doc_ids) | set(instance.relevant)
            for other in first_positives:
                if other.doc_id in present:
                    continue
                present.add(other.doc_id)
                features.append(np.asarray(other.features, dtype=np.float64))
                teacher.append(instance.known_scores.get(other.doc_id, -math.inf))
        expanded.append(
            (
                np.asarray(instance.query_features, dtype=np.float64),
                np.vstack(features),
                np.array(teacher, dtype=np.float64),
            )
        )
    return expanded


class _Forward:
    """Scores of one candidate list and the intermediates needed for gradients."""

    def __init__(self, params: EncoderParams, xq: np.ndarray, X: np.ndarray, mode: ScoringMode):
        beta = params.beta
        self.mode = mode
        self.xq, self.X = xq, X
        self.mu_q = xq @ params.W_M
        self.t_q = xq @ params.W_S
        self.v_q = softplus(self.t_q, beta)
        self.mu_d = X @ params.W_M
        self.t_d = X @ params.W_S
        self.v_d = softplus(self.t_d, beta)
        self.diff = self.mu_q[None, :] - self.mu_d
        log_sum_d = np.sum(np.log(self.v_d), axis=1)
        mahalanobis = np.sum(self.diff * self.diff / self.v_d, axis=1)
        if mode is ScoringMode.PRODUCT:
            with np.errstate(over="ignore"):
                self.ratio = np.exp(np.sum(np.log(self.v_q)) - log_sum_d)
            variance_term = self.ratio
        else:
            variance_term = np.sum(self.v_q[None, :] / self.v_d, axis=1)
        self.scores = -(log_sum_d + variance_term + mahalanobis)

    def backward(self, g: np.ndarray, beta: float) -> Tuple[np.ndarray, np.ndarray]:
        """Gradients of Σ g_j·y_j with respect to W_M and W_S."""
        v_d, diff = self.v_d, self.diff
        scaled = diff / v_d
        g_mu_q = -2.0 * (g @ scaled)
        g_mu_d = 2.0 * g[:, None] * scaled
        if self.mode is ScoringMode.PRODUCT:
            g_v_q = -np.sum(g * self.ratio) / self.v_q
            g_v_d = g[:, None] * (-(1.0 - self.ratio[:, None]) / v_d + scaled * scaled)
        else:
            g_v_q = -(g @ (1.0 / v_d))
            g_v_d = g[:, None] * (-1.0 / v_d + (self.v_q[None, :] + diff * diff) / (v_d * v_d))
        g_t_q = g_v_q * softplus_grad(self.t_q, beta)
        g_t_d = g_v_d * softplus_grad(self.t_d, beta)
        d_wm = np.outer(self.xq, g_mu_q) + self.X.T @ g_mu_d
        d_ws = np.outer(self.xq, g_t_q) + self.X.T @ g_t_d
        return d_wm, d_ws


def loss_and_gradients(
    params: EncoderParams,
    batch: Sequence[TrainingInstance],
    scoring: Union[ScoringMode, str] = ScoringMode.PRODUCT,
    in_batch_negatives: bool = True,
    fixed_ranks: Optional[Sequence[np.ndarray]] = None,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Mean loss over the batch and its gradients with respect to W_M and W_S.

    Rank weights come from the current scores unless ``fixed_ranks`` gives
    one rank vector per (expanded) instance.
    """
    if not batch:
        raise ContractViolation("empty training batch")
    mode = ScoringMode(scoring)
    total = 0.0
    d_wm = np.zeros_like(params.W_M)
    d_ws = np.zeros_like(params.W_S)
    for i, (xq, X, teacher) in enumerate(_expand(batch, in_batch_negatives)):
        forward = _Forward(params, xq, X, mode)
        if not np.all(np.isfinite(forward.scores)):
            raise TrainingError(
                f"query {batch[i].query_id}: {int(np.sum(~np.isfinite(forward.scores)))} "
                f"non-finite student scores"
            )
        ranks = fixed_ranks[i] if fixed_ranks is not None else ranks_from_scores(forward.scores)
        loss, g = distill_loss_and_grad(forward.scores, teacher, ranks)
        total += loss
        gm, gs = forward.backward(g, params.beta)
        d_wm += gm
        d_ws += gs
    n = len(batch)
    return total / n, d_wm / n, d_ws / n


def batch_ranks(
    params: EncoderParams,
    batch: Sequence[TrainingInstance],
    scoring: Union[ScoringMode, str] = ScoringMode.PRODUCT,
    in_batch_negatives: bool = True,
) -> List[np.ndarray]:
    """Student ranks of every (expanded) instance under ``params``."""
    mode = ScoringMode(scoring)
    return [
        ranks_from_scores(_Forward(params, xq, X, mode).scores)
        for xq, X, _ in _expand(batch, in_batch_negatives)
    ]


def train_step(
    params: EncoderParams,
    batch: Sequence[TrainingInstance],
    lr: float,
    scoring: Union[ScoringMode, str] = ScoringMode.PRODUCT,
    in_batch_negatives: bool = True,
    max_grad_norm: Optional[float] = 10.0,
) -> StepResult:
    """
    One gradient-descent update of W_M and W_S.

    The reported loss is the batch loss before the update. The gradient is
    rescaled to ``max_grad_norm`` when its norm exceeds it; None disables this.

    Raises:
        TrainingError: non-finite loss or gradient (parameters are untouched)
    """
    if lr < 0:
        raise ContractViolation(f"learning rate must be non-negative, got {lr}")
    loss, d_wm, d_ws = loss_and_gradients(params, batch, scoring, in_batch_negatives)
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite loss {loss} on a batch of {len(batch)} queries")
    if not (np.all(np.isfinite(d_wm)) and np.all(np.isfinite(d_ws))):
        raise TrainingError(
            f"non-finite gradient (W_M: {int(np.sum(~np.isfinite(d_wm)))} entries, "
            f"W_S: {int(np.sum(~np.isfinite(d_ws)))} entries), loss {loss:.6f}"
        )
    grad_norm = math.sqrt(float(np.sum(d_wm * d_wm) + np.sum(d_ws * d_ws)))
    clipped = max_grad_norm is not None and grad_norm > max_grad_norm
    if clipped:
        scale = max_grad_norm / grad_norm
        d_wm, d_ws = d_wm * scale, d_ws * scale
    updated = EncoderParams(params.W_M - lr * d_wm, params.W_S - lr * d_ws, params.beta)
    return StepResult(updated, loss, grad_norm, clipped)


def is_refresh_step(step: int, every_n_steps: int) -> bool:
    return every_n_steps > 0 and step > 0 and step % every_n_steps == 0


def refresh_hard_negatives(
    params: EncoderParams,
    corpus: FeatureTable,
    queries: FeatureTable,
    pool: CandidatePool,
    step: int,
    every_n_steps: int,
    depth: int = 100,
    scoring: Union[ScoringMode, str] = ScoringMode.PRODUCT,
    query_ids: Optional[Sequence[str]] = None,
) -> CandidatePool:
    """
    Re-mine hard negatives with the current student.

    Off cadence the pool is returned unchanged. On cadence every query's
    hard pool becomes the student's top ``depth`` documents from a flat
    index over the encoded corpus, positives excluded.

    Raises:
        ContractViolation: empty corpus
    """
    if not is_refresh_step(step, every_n_steps):
        return pool
    if len(corpus) == 0:
        raise ContractViolation("cannot mine hard negatives from an empty corpus")
    index = FlatIndex.build(encode_batch(params, corpus.matrix, corpus.ids))
    query_ids = list(query_ids) if query_ids is not None else list(queries.ids)
    encoded = encode_batch(params, np.vstack([queries.row(q) for q in query_ids]), query_ids)
    hard: Dict[str, List[str]] = {}
    for q in encoded:
        positives = set(pool.positives.get(q.id, ()))
        results = index.search(transform_query(q, scoring), depth + len(positives))
        hard[q.id] = [r.doc_id for r in results if r.doc_id not in positives][:depth]
    return pool.with_hard_pool(hard, step)


@dataclass
class TrainingResult:
    params: EncoderParams
    losses: List[float] = field(default_factory=list)
    steps: int = 0
    skipped_queries: int = 0
    refreshes: int = 0


class Trainer:
    """
    Runs the training loop over a :class:`TrainingData` set.

    Example:
        trainer = Trainer(TrainingSettings(total_steps=500), k=8)
        result = trainer.fit(TrainingData.from_files(...))
        result.params.save("encoder.npz")
    """

    def __init__(
        self,
        settings: Optional[TrainingSettings] = None,
        k: int = 8,
        beta: float = 1.0,
        seed: Optional[int] = 42,
        scoring: Union[ScoringMode, str] = ScoringMode.PRODUCT,
    ):
        self.settings = settings or TrainingSettings()
        self.k = k
        self.beta = beta
        self.seed = seed
        self.scoring = ScoringMode(scoring)
        self.logger = get_logger(self.__class__.__name__)

    def make_instance(
        self,
        data: TrainingData,
        pool: CandidatePool,
        query_id: str,
        rng: np.random.Generator,
    ) -> Optional[TrainingInstance]:
        """Sample D_q; candidates without a teacher score are dropped. ``None`` if fewer than 2 remain."""
        known = data.teacher.get(query_id, {})
        positives = set(pool.positives.get(query_id, ()))
        candidates = []
        for doc_id in pool.sample(query_id, rng):
            if doc_id not in known or doc_id not in data.doc_features:
                self.logger.debug(f"Dropping {doc_id} for query {query_id}: no teacher score or features")
                continue
            candidates.append(
                Candidate(doc_id, data.doc_features.row(doc_id), known[doc_id], doc_id in positives)
            )
        if len(candidates) < 2:
            return None
        return TrainingInstance(
            query_id,
            data.query_features.row(query_id),
            tuple(candidates),
            frozenset(positives),
            known,
        )

    def fit(
        self,
        data: TrainingData,
        params: Optional[EncoderParams] = None,
        log_path: Optional[str] = None,
    ) -> TrainingResult:
        """
        Train for ``settings.total_steps`` steps.

        Args:
            data: Features, qrels, teacher scores and first-stage pools
            params: Starting weights (a seeded random initialization by default)
            log_path: Optional TSV file receiving ``step lr loss`` per step

        Returns:
            TrainingResult with the final parameters and per-step losses
        """
        s = self.settings
        rng = np.random.default_rng(self.seed)
        if params is None:
            params = EncoderParams.initialize(data.m, self.k, self.beta, s.init_scale, rng)
        elif params.m != data.m:
            raise ContractViolation(f"encoder expects {params.m} features, data has {data.m}")

        queries = data.training_queries()
        if not queries:
            raise ContractViolation("no training queries with judgments, teacher scores and features")
        pool = CandidatePool.from_data(data, s)
        result = TrainingResult(params)
        self.logger.info(
            f"Training on {len(queries)} queries, {len(data.doc_features)} documents, "
            f"m={data.m}, k={params.k}, {s.total_steps} steps"
        )

        log_file = None
        if log_path:
            Path(log_path).parent.mkdir(parents=True, exist_ok=True)
            log_file = open(log_path, "w", encoding="utf-8", newline="\n")
            log_file.write("step\tlr\tloss\n")
        try:
            order: List[str] = []
            for step in range(s.total_steps):
                if s.m_hard and is_refresh_step(step, s.refresh_every):
                    pool = refresh_hard_negatives(
                        params, data.doc_features, data.query_features, pool,
                        step, s.refresh_every, s.hard_depth, self.scoring, queries,
                    )
                    result.refreshes += 1
                    self.logger.info(f"Refreshed hard negatives at step {step}")

                batch: List[TrainingInstance] = []
                while len(batch) < min(s.batch_size, len(queries)):
                    if not order:
                        order = [queries[i] for i in rng.permutation(len(queries))]
                    instance = self.make_instance(data, pool, order.pop(), rng)
                    if instance is None:
                        result.skipped_queries += 1
                        if result.skipped_queries > len(queries) * (step + 1):
                            raise TrainingError("no query yields at least 2 scored candidates")
                        continue
                    batch.append(instance)

                lr = learning_rate(step, s.lr, s.warmup_steps, s.total_steps)
                outcome = train_step(
                    params, batch, lr, self.scoring, s.in_batch_negatives, s.max_grad_norm
                )
                params = outcome.params
                result.losses.append(outcome.loss)
                result.steps = step + 1
                if log_file is not None:
                    log_file.write(f"{step}\t{lr:.8g}\t{outcome.loss:.8g}\n")
                if (step + 1) % s.log_every == 0 or step == 0:
                    self.logger.info(
                        f"step {step + 1}/{s.total_steps} loss={outcome.loss:.6f} "
                        f"lr={lr:.3g} grad_norm={outcome.grad_norm:.3f}"
                    )
        finally:
            if log_file is not None:
                log_file.close()

        result.params = params
        self.logger.info(f"Training finished after {result.steps} steps")
        return result


__all__ = [
    "Candidate",
    "TrainingInstance",
    "CandidatePool",
    "StepResult",
    "TrainingResult",
    "Trainer",
    "learning_rate",
    "loss_and_gradients",
    "batch_ranks",
    "train_step",
    "is_refresh_step",
    "refresh_hard_negatives",
]
