"""Tests for the main RetrievalEngine class."""

import pytest
import tempfile
from pathlib import Path

from mvn_retrieval.config.settings import Config, SearchSettings, SyntheticSettings
from mvn_retrieval.core.gaussian import GaussianEmbedding
from mvn_retrieval.core.records import read_embeddings, write_embeddings
from mvn_retrieval.core.transform import transform_query
from mvn_retrieval.errors import ConfigError, ContractViolation, DimensionMismatchError, DuplicateIdError
from mvn_retrieval.evaluation.trec import read_run
from mvn_retrieval.indexes import FlatIndex, GraphIndex, load_index
from mvn_retrieval.main import RetrievalEngine
from mvn_retrieval.training.encoder import EncoderParams


SMALL = SyntheticSettings(
    k=4,
    topics=4,
    docs=200,
    train_queries=16,
    test_queries=8,
    nuisance_dims=4,
    teacher_depth=60,
    pool_depth=30,
    graded_depth=3,
)


def small_config(**overrides):
    return Config(k=4, search=SearchSettings(workers=2), synthetic=SMALL).with_overrides(**overrides)


class TestRetrievalEngine:
    """Test main RetrievalEngine class."""

    @pytest.fixture
    def temp_project(self):
        """Create temporary project with a generated synthetic task."""
        with tempfile.TemporaryDirectory() as tmpdir:
            engine = RetrievalEngine(tmpdir, config=small_config())
            engine.synthesize(str(Path(tmpdir) / "data"))
            yield tmpdir

    def test_engine_initialization(self, temp_project):
        """Test engine initialization."""
        engine = RetrievalEngine(temp_project, config=small_config(seed=9))

        assert engine.project_root == Path(temp_project)
        assert engine.config.seed == 9
        assert set(engine.AVAILABLE_INDEXES) == {"flat", "graph"}

    def test_config_file_is_loaded(self, temp_project):
        """Test that the project config file is read."""
        (Path(temp_project) / "mvnr.yaml").write_text("k: 16\nindex:\n  kind: flat\n")

        engine = RetrievalEngine(temp_project, seed=5)

        assert engine.config.k == 16
        assert engine.config.index.kind == "flat"
        assert engine.config.seed == 5

    def test_invalid_config_file(self, temp_project):
        """Test that invalid configuration stops initialization."""
        (Path(temp_project) / "mvnr.yaml").write_text("scoring: cosine\n")

        with pytest.raises(ConfigError):
            RetrievalEngine(temp_project)

    @pytest.mark.parametrize("kind,index_class", [("flat", FlatIndex), ("graph", GraphIndex)])
    def test_ingest(self, temp_project, kind, index_class):
        """Test ingesting a document file into each index kind."""
        engine = RetrievalEngine(temp_project, config=small_config())
        data = Path(temp_project) / "data"

        summary = engine.ingest(str(data / "docs.jsonl"), str(data / f"{kind}.mvnr"), kind=kind, M=8)

        assert summary.count == 200
        assert summary.k == 4
        index = load_index(str(data / f"{kind}.mvnr"))
        assert isinstance(index, index_class)
        if kind == "graph":
            assert index.params.M == 8

    def test_ingest_unknown_kind(self, temp_project):
        """Test ingest with an unknown index kind."""
        engine = RetrievalEngine(temp_project, config=small_config())
        data = Path(temp_project) / "data"

        with pytest.raises(ContractViolation):
            engine.ingest(str(data / "docs.jsonl"), str(data / "x.mvnr"), kind="ivf")

    def test_search_writes_run(self, temp_project):
        """Test batch retrieval keeps query order and matches exact search."""
        engine = RetrievalEngine(temp_project, config=small_config())
        data = Path(temp_project) / "data"
        engine.ingest(str(data / "docs.jsonl"), str(data / "docs.mvnr"), kind="flat")

        run = engine.search(
            str(data / "docs.mvnr"), str(data / "queries_test.jsonl"), 5, out_run_path=str(data / "run.txt")
        )

        queries = read_embeddings(str(data / "queries_test.jsonl"))
        assert list(run) == [q.id for q in queries]
        assert read_run(str(data / "run.txt")) == run
        index = FlatIndex.build(read_embeddings(str(data / "docs.jsonl")))
        expected = [r.doc_id for r in index.search(transform_query(queries[0]), 5)]
        assert [r.doc_id for r in run[queries[0].id]] == expected

    def test_search_dimension_mismatch(self, temp_project):
        """Test that query and index dimensions must agree."""
        engine = RetrievalEngine(temp_project, config=small_config())
        index = FlatIndex.build([GaussianEmbedding("d", [0.0, 0.0], [1.0, 1.0])])

        with pytest.raises(DimensionMismatchError):
            engine.search_index(index, [GaussianEmbedding("q", [0.0], [1.0])], 1)

    def test_search_rejects_duplicate_query_ids(self, temp_project):
        """Test that a query id may appear only once per batch."""
        engine = RetrievalEngine(temp_project, config=small_config())
        index = FlatIndex.build([GaussianEmbedding("d", [0.0], [1.0])])
        queries = [
            GaussianEmbedding("q", [0.0], [1.0]),
            GaussianEmbedding("q", [5.0], [2.0]),
        ]

        with pytest.raises(DuplicateIdError) as exc:
            engine.search_index(index, queries, 1)

        assert exc.value.item_id == "q"
        assert "duplicate query id" in str(exc.value)

    def test_scoring_mode(self, temp_project):
        """Test that product and trace scoring can order documents differently."""
        docs = [
            GaussianEmbedding("a", [0.0, 0.0], [1.0, 1.0]),
            GaussianEmbedding("b", [0.0, 0.0], [4.0, 1.0]),
        ]
        query = GaussianEmbedding("q", [0.0, 0.0], [4.0, 0.25])
        index = FlatIndex.build(docs)

        product = RetrievalEngine(temp_project, config=small_config()).search_index(index, [query], 2)
        trace = RetrievalEngine(temp_project, config=small_config(scoring="trace")).search_index(index, [query], 2)
        overridden = RetrievalEngine(temp_project, config=small_config()).search_index(
            index, [query], 2, scoring="trace"
        )

        assert [r.doc_id for r in product["q"]] == ["a", "b"]
        assert [r.doc_id for r in trace["q"]] == ["b", "a"]
        assert overridden == trace

    def test_evaluate_and_qpp(self, temp_project):
        """Test evaluation and the QPP study from files."""
        engine = RetrievalEngine(temp_project, config=small_config())
        data = Path(temp_project) / "data"
        engine.ingest(str(data / "docs.jsonl"), str(data / "docs.mvnr"), kind="flat")
        engine.search(
            str(data / "docs.mvnr"), str(data / "queries_test.jsonl"), 100, out_run_path=str(data / "run.txt")
        )

        report = engine.evaluate(str(data / "run.txt"), str(data / "qrels.txt"))

        assert report.num_queries == 8
        assert 0.0 < report.means["mrr@10"] <= 1.0

        queries = read_embeddings(str(data / "queries_test.jsonl"))
        per_query = data / "per_query.txt"
        per_query.write_text("".join(f"{q.id} {i / 10}\n" for i, q in enumerate(queries)))
        qpp = engine.qpp(str(data / "queries_test.jsonl"), str(per_query))

        assert len(qpp.records) == 8
        assert -1.0 <= qpp.kendall <= 1.0

    def test_evaluate_worker_count_does_not_change_the_report(self, temp_project):
        """Test that parallel evaluation matches a single worker."""
        engine = RetrievalEngine(temp_project, config=small_config())
        data = Path(temp_project) / "data"
        engine.ingest(str(data / "docs.jsonl"), str(data / "docs.mvnr"), kind="flat")
        engine.search(
            str(data / "docs.mvnr"), str(data / "queries_test.jsonl"), 20, out_run_path=str(data / "run.txt")
        )

        single = engine.evaluate(str(data / "run.txt"), str(data / "qrels.txt"), workers=1)
        parallel = engine.evaluate(str(data / "run.txt"), str(data / "qrels.txt"), workers=4)

        assert parallel.means == single.means
        assert parallel.per_query == single.per_query

    def test_train_and_encode(self, temp_project):
        """Test a short training run followed by encoding."""
        engine = RetrievalEngine(temp_project, config=small_config())
        data = Path(temp_project) / "data"
        params_path = str(data / "encoder.npz")

        result = engine.train(
            str(data / "doc_features.jsonl"),
            str(data / "query_features_train.jsonl"),
            str(data / "qrels.txt"),
            str(data / "teacher_scores.tsv"),
            params_path,
            bm25_run=str(data / "bm25_run.txt"),
            steps=3,
            log_path=str(data / "train.tsv"),
        )

        assert result.steps == 3
        assert len(result.losses) == 3
        assert (data / "train.tsv").read_text().splitlines()[0] == "step\tlr\tloss"
        params = EncoderParams.load(params_path)
        assert params.k == 4
        assert params.m == 12

        count = engine.encode(params_path, str(data / "doc_features.jsonl"), str(data / "encoded.jsonl"))

        assert count == 200
        encoded = read_embeddings(str(data / "encoded.jsonl"))
        assert all(e.k == 4 for e in encoded)

    def test_train_negative_steps(self, temp_project):
        """Test step count validation."""
        engine = RetrievalEngine(temp_project, config=small_config())
        data = Path(temp_project) / "data"

        with pytest.raises(ContractViolation):
            engine.train(
                str(data / "doc_features.jsonl"),
                str(data / "query_features_train.jsonl"),
                str(data / "qrels.txt"),
                str(data / "teacher_scores.tsv"),
                str(data / "encoder.npz"),
                steps=-1,
            )

    def test_encode_feature_mismatch(self, temp_project):
        """Test that encoder width and feature width must agree."""
        engine = RetrievalEngine(temp_project, config=small_config())
        params_path = str(Path(temp_project) / "wide.npz")
        EncoderParams.initialize(20, 4).save(params_path)

        with pytest.raises(DimensionMismatchError):
            engine.encode(params_path, str(Path(temp_project) / "data" / "doc_features.jsonl"), "out.jsonl")

    def test_gradient_check(self, temp_project):
        """Test the analytic gradients against finite differences."""
        engine = RetrievalEngine(temp_project, config=small_config())

        results = engine.gradient_check(seeds=range(3))

        assert len(results) == 3
        assert all(result.passed for result in results)

    def test_round_trip_embeddings(self, temp_project):
        """Test that written query files feed back into search."""
        engine = RetrievalEngine(temp_project, config=small_config())
        path = str(Path(temp_project) / "q.jsonl")
        write_embeddings(path, [GaussianEmbedding("q", [0.0, 0.0, 0.0, 0.0], [1.0, 1.0, 1.0, 1.0])])
        index = FlatIndex.build(read_embeddings(str(Path(temp_project) / "data" / "docs.jsonl")))

        run = engine.search_index(index, read_embeddings(path), 3)

        assert len(run["q"]) == 3


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
