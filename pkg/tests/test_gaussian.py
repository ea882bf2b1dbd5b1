"""Tests for diagonal Gaussian embeddings and KL scoring."""

import math

import numpy as np
import pytest
from scipy import integrate

from mvn_retrieval.core.gaussian import (
    GaussianEmbedding,
    kl_divergence,
    kl_rank_score,
    log_pdf,
    pdf,
    rank_score,
)
from mvn_retrieval.errors import (
    ContractViolation,
    DimensionMismatchError,
    EmbeddingValidationError,
)


def G(mean, var, gid="g"):
    return GaussianEmbedding(gid, mean, var)


def random_embedding(rng, k, gid="g", mean_range=3.0, var_range=(0.1, 10.0)):
    return GaussianEmbedding(
        gid,
        rng.uniform(-mean_range, mean_range, k),
        rng.uniform(var_range[0], var_range[1], k),
    )


def monte_carlo_kl(q, d, n, rng):
    x = q.sample(n, rng)
    log_q = -0.5 * (q.k * math.log(2 * math.pi) + q.log_variance_sum + np.sum((x - q.mean) ** 2 / q.variance, axis=1))
    log_d = -0.5 * (d.k * math.log(2 * math.pi) + d.log_variance_sum + np.sum((x - d.mean) ** 2 / d.variance, axis=1))
    return float(np.mean(log_q - log_d))


class TestGaussianEmbedding:
    """Test embedding validation."""

    def test_valid_embedding(self):
        g = G([0.0, 1.0], [1.0, 2.0], "doc-1")

        assert g.k == 2
        assert g.id == "doc-1"
        assert g.log_variance_sum == pytest.approx(math.log(2.0))

    def test_arrays_are_read_only(self):
        g = G([0.0], [1.0])

        with pytest.raises(ValueError):
            g.mean[0] = 5.0

    def test_rejects_non_positive_variance(self):
        with pytest.raises(EmbeddingValidationError) as exc:
            G([0.0, 0.0], [1.0, 0.0], "bad")
        assert "bad" in str(exc.value)

    def test_rejects_non_finite_values(self):
        with pytest.raises(ContractViolation):
            G([float("nan")], [1.0])
        with pytest.raises(ContractViolation):
            G([0.0], [float("inf")])

    def test_rejects_length_mismatch_and_empty(self):
        with pytest.raises(EmbeddingValidationError):
            G([0.0, 1.0], [1.0])
        with pytest.raises(EmbeddingValidationError):
            G([], [])

    def test_equality(self):
        assert G([1.0], [2.0], "a") == G([1.0], [2.0], "a")
        assert G([1.0], [2.0], "a") != G([1.0], [2.0], "b")


class TestPdf:
    """Test the density."""

    def test_standard_normal_at_zero(self):
        assert pdf([0.0], G([0.0], [1.0])) == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-12)
        assert pdf([0.0], G([0.0], [1.0])) == pytest.approx(0.398942, abs=1e-6)

    def test_two_dimensional_product(self):
        value = pdf([1.0, 1.0], G([0.0, 0.0], [1.0, 1.0]))
        assert value == pytest.approx(math.exp(-1.0) / (2 * math.pi), rel=1e-12)
        assert value == pytest.approx(0.058550, abs=1e-6)

    def test_mode_is_the_mean(self):
        rng = np.random.default_rng(0)
        g = random_embedding(rng, 3)
        peak = pdf(g.mean, g)
        for _ in range(50):
            assert pdf(g.mean + rng.normal(0, 0.5, 3), g) < peak

    def test_log_pdf_matches_pdf(self):
        g = G([0.5, -1.0], [0.3, 2.0])
        assert math.exp(log_pdf([0.1, 0.2], g)) == pytest.approx(pdf([0.1, 0.2], g), rel=1e-12)

    def test_no_underflow_in_log_space_at_large_k(self):
        g = G(np.zeros(381), np.full(381, 0.01))
        assert math.isfinite(log_pdf(np.zeros(381), g))

    @pytest.mark.parametrize("mean,var", [(0.0, 1.0), (2.5, 0.04), (-1.0, 9.0)])
    def test_normalization(self, mean, var):
        g = G([mean], [var])
        sigma = math.sqrt(var)
        total, _ = integrate.quad(lambda x: pdf([x], g), mean - 10 * sigma, mean + 10 * sigma, epsabs=1e-12)
        assert abs(total - 1.0) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            pdf([0.0, 0.0], G([0.0], [1.0]))

    def test_non_finite_input(self):
        with pytest.raises(ContractViolation):
            pdf([float("nan")], G([0.0], [1.0]))


class TestKlDivergence:
    """Test the closed-form KL divergence."""

    def test_identity_is_exactly_zero(self):
        rng = np.random.default_rng(1)
        for k in (1, 2, 8, 381):
            g = random_embedding(rng, k, var_range=(0.5, 2.0))
            assert kl_divergence(g, g) == 0.0

    def test_shifted_mean(self):
        assert kl_divergence(G([0.0], [1.0]), G([1.0], [1.0])) == pytest.approx(0.5, abs=1e-15)

    def test_wider_query(self):
        expected = 0.5 * (math.log(0.5) - 1.0 + 2.0)
        value = kl_divergence(G([0.0], [2.0]), G([0.0], [1.0]))
        assert value == pytest.approx(expected, abs=1e-15)
        assert value == pytest.approx(0.153426, abs=1e-6)

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(500):
            k = int(rng.integers(1, 10))
            q = random_embedding(rng, k, "q")
            d = random_embedding(rng, k, "d")
            assert kl_divergence(q, d) >= -1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            kl_divergence(G([0.0], [1.0]), G([0.0, 0.0], [1.0, 1.0]))

    @pytest.mark.parametrize(
        "q,d,expected",
        [
            (([0.0], [1.0]), ([1.0], [1.0]), 0.5),
            (([0.0], [2.0]), ([0.0], [1.0]), 0.153426),
        ],
    )
    def test_monte_carlo_examples(self, q, d, expected):
        rng = np.random.default_rng(3)
        estimate = monte_carlo_kl(G(*q, "q"), G(*d, "d"), 200_000, rng)
        assert estimate == pytest.approx(expected, abs=1e-2)

    @pytest.mark.slow
    def test_monte_carlo_random_pairs(self):
        rng = np.random.default_rng(4)
        for i in range(50):
            k = int(rng.integers(1, 4))
            q = random_embedding(rng, k, "q", mean_range=0.5, var_range=(0.8, 1.25))
            d = random_embedding(rng, k, "d", mean_range=0.5, var_range=(0.8, 1.25))
            estimate = monte_carlo_kl(q, d, 1_000_000, rng)
            assert abs(estimate - kl_divergence(q, d)) < 1e-2, f"pair {i}, k={k}"


class TestRankScore:
    """Test the rank-equivalent scores."""

    def test_worked_example(self):
        value = rank_score(G([2.0], [1.0], "q"), G([1.0], [2.0], "d"))
        assert value == pytest.approx(-(math.log(2.0) + 0.5 + 0.5), rel=1e-15)
        assert value == pytest.approx(-1.693147, abs=1e-6)

    def test_identical_unit_variance(self):
        assert rank_score(G([0.0], [1.0]), G([0.0], [1.0])) == -1.0

    def test_consistency_with_kl_at_k1(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            q = random_embedding(rng, 1, "q")
            d = random_embedding(rng, 1, "d")
            expected = -2.0 * kl_divergence(q, d) - (q.log_variance_sum + 1)
            assert rank_score(q, d) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    @pytest.mark.parametrize("k", [1, 2, 3, 8, 64])
    def test_trace_form_consistency_with_kl(self, k):
        rng = np.random.default_rng(6 + k)
        for _ in range(100):
            q = random_embedding(rng, k, "q")
            d = random_embedding(rng, k, "d")
            expected = -2.0 * kl_divergence(q, d) - (q.log_variance_sum + k)
            assert kl_rank_score(q, d) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_product_and_trace_forms_differ_beyond_k1(self):
        q = G([0.0, 0.0], [2.0, 0.5], "q")
        d = G([0.0, 0.0], [1.0, 1.0], "d")
        # ratio of products is 1, trace is 2.5
        assert rank_score(q, d) == pytest.approx(-1.0)
        assert kl_rank_score(q, d) == pytest.approx(-2.5)

    @pytest.mark.parametrize("k", [2, 8, 64])
    def test_product_form_is_kl_plus_a_variance_correction(self, k):
        rng = np.random.default_rng(20 + k)
        for _ in range(100):
            q = random_embedding(rng, k, "q", var_range=(0.5, 2.0))
            d = random_embedding(rng, k, "d", var_range=(0.5, 2.0))
            trace = float(np.sum(q.variance / d.variance))
            ratio = math.exp(q.log_variance_sum - d.log_variance_sum)
            expected = -2.0 * kl_divergence(q, d) - (q.log_variance_sum + k) + trace - ratio
            assert rank_score(q, d) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_product_form_follows_kl_when_documents_share_variance(self):
        rng = np.random.default_rng(31)
        k = 8
        var = rng.uniform(0.2, 4.0, k)
        docs = [G(rng.uniform(-3, 3, k), var, f"d{i}") for i in range(100)]
        q = random_embedding(rng, k, "q", var_range=(0.5, 2.0))

        by_product = sorted(docs, key=lambda d: -rank_score(q, d))
        by_kl = sorted(docs, key=lambda d: kl_divergence(q, d))

        assert [d.id for d in by_product] == [d.id for d in by_kl]

    def test_product_form_can_reverse_kl_order_beyond_k1(self):
        q = G([0.0, 0.0], [4.0, 0.25], "q")
        a = G([0.0, 0.0], [1.0, 1.0], "a")
        b = G([0.0, 0.0], [4.0, 1.0], "b")

        assert kl_divergence(q, b) < kl_divergence(q, a)
        assert kl_rank_score(q, b) > kl_rank_score(q, a)
        assert rank_score(q, a) == pytest.approx(-1.0)
        assert rank_score(q, b) == pytest.approx(-(math.log(4.0) + 0.25))
        assert rank_score(q, a) > rank_score(q, b)

    def test_shared_covariance_score_difference(self):
        var = [0.5, 2.0, 1.5]
        q = G([1.0, -1.0, 0.5], [1.0, 1.0, 1.0], "q")
        d = G([0.0, 0.0, 0.0], var, "d")
        d_prime = G([2.0, 1.0, -1.0], var, "d2")
        expected = sum(
            ((q.mean[i] - d_prime.mean[i]) ** 2 - (q.mean[i] - d.mean[i]) ** 2) / var[i]
            for i in range(3)
        )
        assert rank_score(q, d) - rank_score(q, d_prime) == pytest.approx(expected, rel=1e-12)

    def test_shared_isotropic_variance_ranks_by_euclidean_distance(self):
        rng = np.random.default_rng(7)
        k = 8
        shared = np.full(k, 2.5)
        docs = [GaussianEmbedding(f"d{i}", rng.normal(0, 2, k), shared) for i in range(1000)]
        means = np.vstack([d.mean for d in docs])
        for j in range(100):
            q = random_embedding(rng, k, f"q{j}", var_range=(0.2, 5.0))
            scores = np.array([rank_score(q, d) for d in docs])
            distances = np.linalg.norm(means - q.mean, axis=1)
            assert np.array_equal(np.argsort(-scores, kind="stable"), np.argsort(distances, kind="stable"))

    def test_large_k_does_not_overflow(self):
        q = G(np.zeros(381), np.full(381, 10.0))
        d = G(np.zeros(381), np.full(381, 0.1))
        assert rank_score(q, d) == -math.inf
        assert math.isfinite(kl_rank_score(q, d))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            rank_score(G([0.0], [1.0]), G([0.0, 1.0], [1.0, 1.0]))


class TestSamplingProperties:
    """Test the expected inner product of independent samples."""

    def test_expected_inner_product_equals_mean_dot_product(self):
        rng = np.random.default_rng(8)
        n = 100_000
        for _ in range(20):
            k = int(rng.integers(1, 9))
            q = GaussianEmbedding("q", rng.uniform(-2, 2, k), np.ones(k))
            d = GaussianEmbedding("d", rng.uniform(-2, 2, k), np.ones(k))
            products = np.sum(q.sample(n, rng) * d.sample(n, rng), axis=1)
            standard_error = products.std(ddof=1) / math.sqrt(n)
            assert abs(products.mean() - float(q.mean @ d.mean)) < 5 * standard_error


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
