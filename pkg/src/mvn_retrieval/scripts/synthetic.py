"""
Seeded synthetic retrieval task.

Hidden Gaussian topics generate documents and queries. Every query belongs
to one topic; all documents of that topic are relevant (grade 1) and the
few closest to the query's intent are highly relevant (grade 2). Teacher
scores are the exact negative KL divergence between the query and document
embeddings plus optional noise. A noisy copy of the teacher ranking stands
in for a first-stage (BM25) candidate pool.

Each query draws a difficulty δ ~ U(0, qpp_coupling) that widens both the
noise on its observed mean and its variance, so the variance norm predicts
how badly the query will do.

Feature vectors for the toy encoder are ``[mean / topic_spread, log variance,
nuisance]``. The nuisance block is noise around a per-topic distractor offset;
a query carries the offset of the next topic, so an untrained encoder is
pulled towards the wrong documents and has to learn to ignore the block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..config.settings import SyntheticSettings
from ..core.gaussian import GaussianEmbedding
from ..core.records import write_embeddings
from ..evaluation.trec import Qrels, RunRecord, write_qrels, write_run
from ..training.data import FeatureTable, TeacherScores, write_teacher_scores
from ..utils.helpers import write_jsonl
from ..utils.logger import get_logger

POOL_TAG = "synthetic-pool"

OUTPUT_FILES = {
    "docs": "docs.jsonl",
    "train_queries": "queries_train.jsonl",
    "test_queries": "queries_test.jsonl",
    "doc_features": "doc_features.jsonl",
    "train_query_features": "query_features_train.jsonl",
    "test_query_features": "query_features_test.jsonl",
    "qrels": "qrels.txt",
    "teacher_scores": "teacher_scores.tsv",
    "bm25_run": "bm25_run.txt",
}


@dataclass
class SyntheticDataset:
    """Ground truth embeddings, encoder features and judgments of one generated task."""

    docs: List[GaussianEmbedding]
    train_queries: List[GaussianEmbedding]
    test_queries: List[GaussianEmbedding]
    doc_features: FeatureTable
    train_query_features: FeatureTable
    test_query_features: FeatureTable
    qrels: Qrels
    teacher: TeacherScores
    pools: Dict[str, List[RunRecord]]
    topic_of: Dict[str, int] = field(default_factory=dict)
    difficulty: Dict[str, float] = field(default_factory=dict)

    @property
    def queries(self) -> List[GaussianEmbedding]:
        return self.train_queries + self.test_queries


def negative_kl(
    q_mean: np.ndarray,
    q_var: np.ndarray,
    d_means: np.ndarray,
    d_vars: np.ndarray,
) -> np.ndarray:
    """−KL(q‖d) of one query against every row of a document block."""
    k = q_mean.size
    kl = 0.5 * (
        np.sum(np.log(d_vars), axis=1)
        - np.sum(np.log(q_var))
        - k
        + np.sum(q_var / d_vars, axis=1)
        + np.sum((q_mean - d_means) ** 2 / d_vars, axis=1)
    )
    return -kl


class SyntheticGenerator:
    """Generate and write synthetic corpora; identical seeds give identical bytes."""

    def __init__(self, settings: Optional[SyntheticSettings] = None, seed: int = 42):
        self.settings = settings or SyntheticSettings()
        self.seed = seed
        self.logger = get_logger(self.__class__.__name__)

    def _features(
        self,
        means: np.ndarray,
        variances: np.ndarray,
        offsets: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        s = self.settings
        nuisance = offsets + s.nuisance_scale * rng.standard_normal((means.shape[0], s.nuisance_dims))
        return np.hstack([means / s.topic_spread, np.log(variances), nuisance])

    def generate(self) -> SyntheticDataset:
        s = self.settings
        rng = np.random.default_rng(self.seed)
        k, n_topics = s.k, s.topics

        centers = rng.normal(0.0, s.topic_spread, (n_topics, k))
        topic_var = np.exp(rng.normal(0.0, 0.25, (n_topics, k)))

        doc_topics = np.arange(s.docs) % n_topics
        doc_means = centers[doc_topics] + s.doc_noise * rng.standard_normal((s.docs, k))
        doc_vars = topic_var[doc_topics] * np.exp(s.variance_jitter * rng.standard_normal((s.docs, k)))
        doc_ids = [f"d{i:05d}" for i in range(s.docs)]

        n_queries = s.train_queries + s.test_queries
        query_topics = np.arange(n_queries) % n_topics
        delta = rng.uniform(0.0, s.qpp_coupling, n_queries) if s.qpp_coupling > 0 else np.zeros(n_queries)
        intents = centers[query_topics] + s.query_noise * rng.standard_normal((n_queries, k))
        drift = (4.0 * delta * s.query_noise)[:, None] * rng.standard_normal((n_queries, k))
        query_means = intents + drift
        query_vars = (
            topic_var[query_topics]
            * (1.0 + 4.0 * delta)[:, None]
            * np.exp(s.variance_jitter * rng.standard_normal((n_queries, k)))
        )
        query_ids = [f"q{j:04d}" for j in range(n_queries)]

        distractors = rng.normal(0.0, s.distractor_scale, (n_topics, s.nuisance_dims))
        doc_features = self._features(doc_means, doc_vars, distractors[doc_topics], rng)
        query_features = self._features(
            query_means, query_vars, distractors[(query_topics + 1) % n_topics], rng
        )

        qrels: Qrels = {}
        teacher: TeacherScores = {}
        pools: Dict[str, List[RunRecord]] = {}
        for j, qid in enumerate(query_ids):
            topic = query_topics[j]
            same_topic = np.flatnonzero(doc_topics == topic)
            judged = {doc_ids[i]: 1 for i in same_topic}
            if s.graded_depth:
                distance = np.sum((doc_means[same_topic] - intents[j]) ** 2, axis=1)
                nearest = same_topic[np.lexsort((same_topic, distance))[: s.graded_depth]]
                judged.update({doc_ids[i]: 2 for i in nearest})
            qrels[qid] = judged

            if j >= s.train_queries:
                continue
            exact = negative_kl(query_means[j], query_vars[j], doc_means, doc_vars)
            scores = exact + s.teacher_noise * rng.standard_normal(s.docs) if s.teacher_noise else exact
            spread = float(np.std(exact)) or 1.0
            pool_scores = exact + s.pool_noise * spread * rng.standard_normal(s.docs)
            pool_rows = np.lexsort((np.arange(s.docs), -pool_scores))[: s.pool_depth]
            pools[qid] = [
                RunRecord(qid, doc_ids[i], rank, float(pool_scores[i]), POOL_TAG)
                for rank, i in enumerate(pool_rows, 1)
            ]
            top_rows = np.lexsort((np.arange(s.docs), -scores))[: s.teacher_depth]
            scored = sorted(set(top_rows.tolist()) | set(same_topic.tolist()) | set(pool_rows.tolist()))
            teacher[qid] = {doc_ids[i]: float(scores[i]) for i in scored}

        docs = [GaussianEmbedding(i, mu, var) for i, mu, var in zip(doc_ids, doc_means, doc_vars)]
        queries = [GaussianEmbedding(i, mu, var) for i, mu, var in zip(query_ids, query_means, query_vars)]
        split = s.train_queries
        dataset = SyntheticDataset(
            docs=docs,
            train_queries=queries[:split],
            test_queries=queries[split:],
            doc_features=FeatureTable(doc_ids, doc_features),
            train_query_features=FeatureTable(query_ids[:split], query_features[:split]),
            test_query_features=FeatureTable(query_ids[split:], query_features[split:]),
            qrels=qrels,
            teacher=teacher,
            pools=pools,
            topic_of={qid: int(t) for qid, t in zip(query_ids, query_topics)},
            difficulty={qid: float(d) for qid, d in zip(query_ids, delta)},
        )
        self.logger.info(
            f"Generated {s.docs} documents, {s.train_queries} train and {s.test_queries} test "
            f"queries over {n_topics} topics (k={k}, seed={self.seed})"
        )
        return dataset

    def write(self, dataset: SyntheticDataset, out_dir: str) -> Dict[str, Path]:
        """Write every artifact under ``out_dir``; returns the paths by role."""
        root = Path(out_dir)
        root.mkdir(parents=True, exist_ok=True)
        paths = {role: root / name for role, name in OUTPUT_FILES.items()}

        write_embeddings(str(paths["docs"]), dataset.docs)
        write_embeddings(str(paths["train_queries"]), dataset.train_queries)
        write_embeddings(str(paths["test_queries"]), dataset.test_queries)
        for role, table in (
            ("doc_features", dataset.doc_features),
            ("train_query_features", dataset.train_query_features),
            ("test_query_features", dataset.test_query_features),
        ):
            write_jsonl(
                str(paths[role]),
                ({"id": i, "features": row.tolist()} for i, row in zip(table.ids, table.matrix)),
            )
        write_qrels(str(paths["qrels"]), dataset.qrels)
        write_teacher_scores(str(paths["teacher_scores"]), dataset.teacher)
        write_run(str(paths["bm25_run"]), dataset.pools)

        self.logger.info(f"Synthetic task written to {root}")
        return paths


def generate_synthetic(
    out_dir: str,
    settings: Optional[SyntheticSettings] = None,
    seed: int = 42,
) -> Dict[str, Path]:
    """Generate a task and write it to ``out_dir``."""
    generator = SyntheticGenerator(settings, seed)
    return generator.write(generator.generate(), out_dir)


__all__ = [
    "OUTPUT_FILES",
    "POOL_TAG",
    "SyntheticDataset",
    "SyntheticGenerator",
    "generate_synthetic",
    "negative_kl",
]
