"""Tests for the augmented inner-product transform."""

import math

import numpy as np
import pytest

from mvn_retrieval.core.gaussian import GaussianEmbedding, kl_divergence, kl_rank_score, rank_score
from mvn_retrieval.core.transform import (
    LOG_SUM_GUARD,
    ScoringMode,
    document_prior,
    dot_score,
    transform_doc,
    transform_docs,
    transform_query,
)
from mvn_retrieval.errors import DimensionMismatchError, EmptyCorpusError, TransformRangeError


def random_pair(rng, k):
    q = GaussianEmbedding("q", rng.uniform(-3, 3, k), rng.uniform(0.1, 10.0, k))
    d = GaussianEmbedding("d", rng.uniform(-3, 3, k), rng.uniform(0.1, 10.0, k))
    return q, d


class TestTransformQuery:
    """Test the query layout."""

    def test_single_dimension(self):
        tq = transform_query(GaussianEmbedding("q", [2.0], [1.0]))

        np.testing.assert_array_equal(tq.vec, [1.0, 1.0, 4.0, 2.0])
        assert tq.k == 1
        assert tq.mode is ScoringMode.PRODUCT

    def test_standard_normal(self):
        tq = transform_query(GaussianEmbedding("q", [0.0], [1.0]))
        np.testing.assert_array_equal(tq.vec, [1.0, 1.0, 0.0, 0.0])

    def test_two_dimensions(self):
        tq = transform_query(GaussianEmbedding("q", [1.0, -1.0], [2.0, 2.0]))
        np.testing.assert_allclose(tq.vec, [1.0, 4.0, 1.0, 1.0, 1.0, -1.0], rtol=1e-12)

    def test_trace_layout(self):
        tq = transform_query(GaussianEmbedding("q", [2.0, 0.0], [1.0, 3.0]), ScoringMode.TRACE)

        np.testing.assert_array_equal(tq.vec, [1.0, 0.0, 5.0, 3.0, 2.0, 0.0])
        assert tq.mode is ScoringMode.TRACE

    def test_mode_accepts_string(self):
        assert transform_query(GaussianEmbedding("q", [0.0], [1.0]), "trace").mode is ScoringMode.TRACE

    def test_vector_is_read_only(self):
        tq = transform_query(GaussianEmbedding("q", [0.0], [1.0]))
        with pytest.raises(ValueError):
            tq.vec[0] = 2.0


class TestTransformDoc:
    """Test the document layout and prior."""

    def test_worked_example(self):
        td = transform_doc(GaussianEmbedding("d", [1.0], [2.0]))

        expected = [-(math.log(2.0) + 0.5), -0.5, -0.5, 1.0]
        np.testing.assert_allclose(td.vec, expected, rtol=1e-12)
        assert td.prior == pytest.approx(-1.193147, abs=1e-6)
        assert td.id == "d"

    def test_standard_normal(self):
        td = transform_doc(GaussianEmbedding("d", [0.0], [1.0]))
        np.testing.assert_array_equal(td.vec, [0.0, -1.0, -1.0, 0.0])
        assert td.prior == 0.0

    def test_prior_is_first_component(self):
        rng = np.random.default_rng(0)
        _, d = random_pair(rng, 5)
        td = transform_doc(d)
        assert td.prior == td.vec[0] == document_prior(d)

    def test_transform_docs_stacks_rows(self):
        docs = [GaussianEmbedding(f"d{i}", [float(i)], [1.0]) for i in range(3)]
        matrix = transform_docs(docs)
        assert matrix.shape == (3, 4)
        np.testing.assert_array_equal(matrix[2], transform_doc(docs[2]).vec)

    def test_transform_docs_empty(self):
        with pytest.raises(EmptyCorpusError):
            transform_docs([])


class TestDotScore:
    """Test that the inner product reproduces the KL scores."""

    def test_worked_example(self):
        tq = transform_query(GaussianEmbedding("q", [2.0], [1.0]))
        td = transform_doc(GaussianEmbedding("d", [1.0], [2.0]))
        assert dot_score(tq, td) == pytest.approx(-1.693147, abs=1e-6)

    @pytest.mark.parametrize("k", [1, 2, 8, 64, 381])
    def test_matches_rank_score(self, k):
        rng = np.random.default_rng(k)
        for _ in range(1000):
            q, d = random_pair(rng, k)
            expected = rank_score(q, d)
            assert dot_score(transform_query(q), transform_doc(d)) == pytest.approx(
                expected, rel=1e-9, abs=1e-9
            )

    @pytest.mark.parametrize("k", [1, 2, 8, 64, 381])
    def test_trace_mode_matches_kl_rank_score(self, k):
        rng = np.random.default_rng(100 + k)
        for _ in range(200):
            q, d = random_pair(rng, k)
            value = dot_score(transform_query(q, ScoringMode.TRACE), transform_doc(d))
            assert value == pytest.approx(kl_rank_score(q, d), rel=1e-9, abs=1e-9)

    @pytest.mark.parametrize("q_var,d_var", [(0.1, 10.0), (10.0, 0.1)])
    def test_extreme_variance_ratios(self, q_var, d_var):
        rng = np.random.default_rng(7)
        k = 64
        q = GaussianEmbedding("q", rng.uniform(-3, 3, k), np.full(k, q_var))
        d = GaussianEmbedding("d", rng.uniform(-3, 3, k), np.full(k, d_var))
        for mode, expected in (("product", rank_score(q, d)), ("trace", kl_rank_score(q, d))):
            value = dot_score(transform_query(q, mode), transform_doc(d))
            assert value == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_order_matches_kl_at_k1(self):
        rng = np.random.default_rng(3)
        docs = [GaussianEmbedding(f"d{i}", rng.uniform(-3, 3, 1), rng.uniform(0.2, 4.0, 1)) for i in range(200)]
        q = GaussianEmbedding("q", [0.3], [1.7])
        tq = transform_query(q)
        dots = np.array([dot_score(tq, transform_doc(d)) for d in docs])
        kls = np.array([kl_divergence(q, d) for d in docs])
        assert np.array_equal(np.argsort(-dots), np.argsort(kls))

    def test_trace_order_matches_kl(self):
        rng = np.random.default_rng(4)
        k = 8
        docs = [GaussianEmbedding(f"d{i}", rng.uniform(-3, 3, k), rng.uniform(0.2, 4.0, k)) for i in range(200)]
        q = GaussianEmbedding("q", rng.uniform(-1, 1, k), rng.uniform(0.5, 2.0, k))
        tq = transform_query(q, "trace")
        dots = np.array([dot_score(tq, transform_doc(d)) for d in docs])
        kls = np.array([kl_divergence(q, d) for d in docs])
        assert np.array_equal(np.argsort(-dots), np.argsort(kls))

    def test_length_mismatch(self):
        tq = transform_query(GaussianEmbedding("q", [0.0], [1.0]))
        td = transform_doc(GaussianEmbedding("d", [0.0, 0.0], [1.0, 1.0]))
        with pytest.raises(DimensionMismatchError):
            dot_score(tq, td)


class TestRangeGuard:
    """Test the log-variance guard band."""

    def test_large_variance_product_is_rejected(self):
        g = GaussianEmbedding("wide", np.zeros(381), np.full(381, math.e**2))
        assert g.log_variance_sum > LOG_SUM_GUARD

        with pytest.raises(TransformRangeError) as exc:
            transform_query(g)
        assert "wide" in str(exc.value)
        with pytest.raises(TransformRangeError):
            transform_doc(g)

    def test_small_variance_product_is_rejected(self):
        g = GaussianEmbedding("narrow", np.zeros(381), np.full(381, math.exp(-2.0)))
        with pytest.raises(TransformRangeError):
            transform_doc(g)

    def test_inside_guard_band(self):
        g = GaussianEmbedding("ok", np.zeros(381), np.full(381, math.exp(1.5)))
        assert np.all(np.isfinite(transform_query(g).vec))
        assert np.all(np.isfinite(transform_doc(g).vec))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
