"""
Main entry point for the retrieval engine.

This module contains the RetrievalEngine class, which ties the pieces together:
- Ingesting Gaussian embeddings into a flat or graph index
- Batch retrieval into TREC run files
- Evaluation (MRR@10, NDCG@10, MAP) and the variance-based QPP study
- Synthetic task generation, encoder training and encoding

You can use it through the CLI (``mvnr``) or import it directly for scripting.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from .config.loader import ConfigLoader
from .config.settings import Config
from .core.gaussian import GaussianEmbedding
from .core.records import read_embeddings, write_embeddings
from .core.transform import ScoringMode, transform_query
from .errors import ContractViolation, DimensionMismatchError, DuplicateIdError
from .evaluation.metrics import EvaluationReport, evaluate
from .evaluation.qpp import QppReport, qpp_study
from .evaluation.trec import Run, read_per_query, read_qrels, read_run, records_from_ranking, write_run
from .indexes import AVAILABLE_INDEXES, BaseIndex, IndexParams, load_index
from .scripts.synthetic import SyntheticGenerator
from .training.data import TrainingData, read_features
from .training.encoder import EncoderParams, encode_batch
from .training.gradcheck import GradientCheckResult, run_gradient_check
from .training.trainer import Trainer, TrainingResult
from .utils.logger import setup_logger


@dataclass(frozen=True)
class IngestSummary:
    path: str
    kind: str
    count: int
    k: int


class RetrievalEngine:
    """
    Orchestrates every engine operation from one validated configuration.

    Example:
        engine = RetrievalEngine(".")
        engine.ingest("docs.jsonl", "docs.mvnr")
        run = engine.search("docs.mvnr", "queries.jsonl", top_k=10, out_run_path="run.txt")
        report = engine.evaluate("run.txt", "qrels.txt")
    """

    AVAILABLE_INDEXES = AVAILABLE_INDEXES

    def __init__(
        self,
        project_root: str = ".",
        config_file: Optional[str] = None,
        log_level: Optional[int] = None,
        config: Optional[Config] = None,
        **overrides,
    ):
        """
        Initialize the engine.

        Args:
            project_root: Directory searched for ``mvnr.yaml`` and friends
            config_file: Explicit config file (auto-detected when omitted)
            log_level: Logging verbosity (10=DEBUG, 20=INFO, ...)
            config: Ready-made configuration; skips file loading
            **overrides: Top-level overrides such as ``seed``
        """
        self.project_root = Path(project_root)
        self.logger = setup_logger(level=log_level or 20)
        self.config_loader = ConfigLoader(project_root)
        if config is None:
            config = self.config_loader.load_settings(config_file, **overrides)
        else:
            config = config.with_overrides(**overrides)
        self.config = config
        self.logger.debug(f"Engine initialized (seed={self.config.seed}, k={self.config.k})")

    def index_params(
        self,
        M: Optional[int] = None,
        ef_construction: Optional[int] = None,
        ef_search: Optional[int] = None,
    ) -> IndexParams:
        settings = self.config.index
        return IndexParams(
            M=M or settings.M,
            ef_construction=ef_construction or settings.ef_construction,
            ef_search=ef_search or settings.ef_search,
            seed=self.config.seed,
        )

    def ingest(
        self,
        embeddings_path: str,
        out_index_path: str,
        kind: Optional[str] = None,
        M: Optional[int] = None,
        ef_construction: Optional[int] = None,
        ef_search: Optional[int] = None,
    ) -> IngestSummary:
        """Validate, transform, index and persist a document embedding file."""
        kind = (kind or self.config.index.kind).lower()
        index_class = self.AVAILABLE_INDEXES.get(kind)
        if index_class is None:
            raise ContractViolation(
                f"Unknown index kind: {kind}. Valid kinds: {sorted(self.AVAILABLE_INDEXES)}"
            )
        docs = read_embeddings(embeddings_path)
        self.logger.info(f"Read {len(docs)} documents (k={docs[0].k}) from {embeddings_path}")
        index = index_class.build(docs, self.index_params(M, ef_construction, ef_search))
        index.persist(out_index_path)
        return IngestSummary(out_index_path, kind, len(index), index.k)

    def search_index(
        self,
        index: BaseIndex,
        queries: Sequence[GaussianEmbedding],
        top_k: int,
        ef_search: Optional[int] = None,
        scoring: Optional[Union[ScoringMode, str]] = None,
        workers: Optional[int] = None,
    ) -> Run:
        """
        Retrieve ``top_k`` documents for every query.

        Queries are searched in parallel; the run keeps the input query order.

        Raises:
            DuplicateIdError: two queries share an id
            DimensionMismatchError: a query and the index disagree on k
        """
        mode = ScoringMode(scoring or self.config.scoring)
        seen = set()
        for query in queries:
            if query.id in seen:
                raise DuplicateIdError(query.id, "query")
            seen.add(query.id)
            if query.k != index.k:
                raise DimensionMismatchError(
                    f"query {query.id} has k={query.k}, index has k={index.k}"
                )

        def run_one(query: GaussianEmbedding):
            results = index.search(transform_query(query, mode), top_k, ef_search)
            return query.id, records_from_ranking(query.id, results)

        workers = workers or self.config.search.workers
        with ThreadPoolExecutor(max_workers=workers) as pool:
            run = dict(pool.map(run_one, queries))
        self.logger.info(f"Searched {len(run)} queries (top_k={top_k}, scoring={mode.value})")
        return run

    def search(
        self,
        index_path: str,
        queries_path: str,
        top_k: int,
        out_run_path: Optional[str] = None,
        ef_search: Optional[int] = None,
        scoring: Optional[str] = None,
        workers: Optional[int] = None,
    ) -> Run:
        """Load an index, search a query file and optionally write the run."""
        index = load_index(index_path)
        queries = read_embeddings(queries_path)
        run = self.search_index(index, queries, top_k, ef_search, scoring, workers)
        if out_run_path:
            lines = write_run(out_run_path, run)
            self.logger.info(f"Wrote {lines} run lines to {out_run_path}")
        return run

    def evaluate(
        self,
        run_path: str,
        qrels_path: str,
        map_threshold: Optional[int] = None,
        workers: Optional[int] = None,
    ) -> EvaluationReport:
        """Evaluate a run file against TREC qrels, scoring queries in parallel."""
        settings = self.config.evaluation
        threshold = map_threshold or settings.map_threshold
        report = evaluate(
            read_run(run_path), read_qrels(qrels_path), threshold, workers or settings.workers
        )
        self.logger.info(f"Evaluated {report.num_queries} queries")
        return report

    def qpp(
        self,
        query_embeddings_path: str,
        per_query_path: str,
        reduction: Optional[str] = None,
        metric: Optional[str] = None,
    ) -> QppReport:
        """Correlate the variance predictor with per-query effectiveness."""
        settings = self.config.evaluation
        queries = read_embeddings(query_embeddings_path)
        values = read_per_query(per_query_path, metric or settings.qpp_metric)
        report = qpp_study(queries, values, reduction or settings.qpp_reduction)
        self.logger.info(
            f"QPP over {len(report.records)} queries: pearson={report.pearson:.4f} "
            f"(p={report.p_value:.3g}), kendall={report.kendall:.4f}"
        )
        return report

    def synthesize(self, out_dir: str, **settings) -> Dict[str, Path]:
        """Generate the synthetic task; keyword arguments override ``synthetic`` settings."""
        synthetic = replace(
            self.config.synthetic,
            **{key: value for key, value in settings.items() if value is not None},
        )
        generator = SyntheticGenerator(synthetic, self.config.seed)
        return generator.write(generator.generate(), out_dir)

    def train(
        self,
        doc_features: str,
        query_features: str,
        qrels: str,
        teacher_scores: str,
        out_params: str,
        bm25_run: Optional[str] = None,
        steps: Optional[int] = None,
        k: Optional[int] = None,
        log_path: Optional[str] = None,
    ) -> TrainingResult:
        """Train the toy encoder and persist its parameters."""
        settings = self.config.training
        if steps is not None:
            if steps < 0:
                raise ContractViolation(f"steps must be non-negative, got {steps}")
            settings = replace(settings, total_steps=steps, warmup_steps=min(settings.warmup_steps, steps))
        data = TrainingData.from_files(
            doc_features, query_features, qrels, teacher_scores, bm25_run, settings.hard_depth
        )
        trainer = Trainer(settings, k or self.config.k, self.config.beta, self.config.seed, self.config.scoring)
        result = trainer.fit(data, log_path=log_path)
        result.params.save(out_params)
        self.logger.info(f"Encoder parameters saved to {out_params}")
        return result

    def gradient_check(self, seeds: Optional[Sequence[int]] = None) -> List[GradientCheckResult]:
        return run_gradient_check(seeds, scoring=self.config.scoring)

    def encode(self, params_path: str, features_path: str, out_path: str) -> int:
        """Encode a feature file into an embedding file with trained parameters."""
        params = EncoderParams.load(params_path)
        table = read_features(features_path)
        if table.m != params.m:
            raise DimensionMismatchError(
                f"{features_path} has {table.m} features, encoder expects {params.m}"
            )
        count = write_embeddings(out_path, encode_batch(params, table.matrix, table.ids))
        self.logger.info(f"Encoded {count} items (k={params.k}) into {out_path}")
        return count


__all__ = ["RetrievalEngine", "IngestSummary"]
