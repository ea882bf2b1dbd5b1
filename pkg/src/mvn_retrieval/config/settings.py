"""Typed configuration sections and their defaults."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Mapping


@dataclass(frozen=True)
class IndexSettings:
    kind: str = "graph"
    M: int = 16
    ef_construction: int = 200
    ef_search: int = 100


@dataclass(frozen=True)
class TrainingSettings:
    """SGD with linear warmup and decay over the listwise distillation loss."""

    lr: float = 1e-2
    warmup_steps: int = 100
    total_steps: int = 2000
    batch_size: int = 32
    m_positive: int = 4
    m_bm25: int = 4
    m_hard: int = 4
    refresh_every: int = 5000
    hard_depth: int = 100
    in_batch_negatives: bool = True
    init_scale: float = 0.1
    max_grad_norm: float = 10.0
    log_every: int = 50


@dataclass(frozen=True)
class EvaluationSettings:
    qpp_reduction: str = "l2"
    qpp_metric: str = "ndcg@10"
    map_threshold: int = 1
    workers: int = 4


@dataclass(frozen=True)
class SearchSettings:
    workers: int = 4


@dataclass(frozen=True)
class SyntheticSettings:
    """Shape and noise levels of the generated topic corpus."""

    k: int = 8
    topics: int = 8
    docs: int = 2000
    train_queries: int = 200
    test_queries: int = 50
    topic_spread: float = 3.0
    doc_noise: float = 0.5
    query_noise: float = 0.5
    variance_jitter: float = 0.1
    nuisance_dims: int = 24
    nuisance_scale: float = 1.0
    distractor_scale: float = 1.0
    teacher_noise: float = 0.0
    teacher_depth: int = 300
    pool_depth: int = 100
    pool_noise: float = 1.0
    qpp_coupling: float = 0.5
    graded_depth: int = 10


@dataclass(frozen=True)
class Config:
    """Complete engine configuration."""

    k: int = 381
    beta: float = 1.0
    seed: int = 42
    scoring: str = "product"
    index: IndexSettings = field(default_factory=IndexSettings)
    training: TrainingSettings = field(default_factory=TrainingSettings)
    evaluation: EvaluationSettings = field(default_factory=EvaluationSettings)
    search: SearchSettings = field(default_factory=SearchSettings)
    synthetic: SyntheticSettings = field(default_factory=SyntheticSettings)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Config":
        """Build a config from a (validated) nested dictionary; missing keys keep defaults."""
        base = cls()
        values: Dict[str, Any] = {}
        for f in fields(cls):
            if f.name not in data:
                continue
            if f.name in SECTIONS:
                values[f.name] = replace(getattr(base, f.name), **dict(data[f.name] or {}))
            else:
                values[f.name] = data[f.name]
        return replace(base, **values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_overrides(self, **overrides: Any) -> "Config":
        """Top-level overrides; ``None`` values are ignored."""
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})


SECTIONS = {
    "index": IndexSettings,
    "training": TrainingSettings,
    "evaluation": EvaluationSettings,
    "search": SearchSettings,
    "synthetic": SyntheticSettings,
}


__all__ = [
    "Config",
    "IndexSettings",
    "TrainingSettings",
    "EvaluationSettings",
    "SearchSettings",
    "SyntheticSettings",
    "SECTIONS",
]
