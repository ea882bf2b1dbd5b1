"""Tests for the toy encoder."""

import math

import numpy as np
import pytest

from mvn_retrieval.errors import ContractViolation, DimensionMismatchError
from mvn_retrieval.training.encoder import (
    EncoderParams,
    encode,
    encode_batch,
    softplus,
    softplus_grad,
)


class TestSoftplus:
    """Test the variance activation."""

    def test_values(self):
        assert float(softplus(0.0)) == pytest.approx(math.log(2.0), rel=1e-12)
        assert float(softplus(1.0)) == pytest.approx(math.log1p(math.e), rel=1e-12)
        assert float(softplus(-1.0)) == pytest.approx(math.log1p(math.exp(-1.0)), rel=1e-12)

    def test_beta(self):
        assert float(softplus(0.0, beta=2.0)) == pytest.approx(math.log(2.0) / 2.0, rel=1e-12)

    def test_no_overflow(self):
        values = softplus(np.array([-800.0, 800.0]))
        assert values[1] == 800.0
        assert 0.0 <= values[0] < 1e-300

    def test_shape_preserved(self):
        assert softplus(np.zeros((3, 2))).shape == (3, 2)
        assert np.ndim(softplus(0.5)) == 0

    def test_positive(self):
        t = np.linspace(-30, 30, 101)
        assert np.all(softplus(t) > 0)

    def test_positive_and_increasing_down_to_minus_100(self):
        t = np.linspace(-100, 100, 2001)
        values = softplus(t)
        assert np.all(values > 0)
        assert np.all(np.diff(values) > 0)

    def test_matches_identity_for_large_inputs(self):
        assert abs(float(softplus(50.0)) - 50.0) < 1e-20

    def test_gap_to_relu_shrinks_as_beta_grows(self):
        t = np.linspace(-3, 3, 61)
        gaps = [softplus(t, beta) - np.maximum(t, 0.0) for beta in (0.5, 1.0, 2.5, 5.0, 7.5, 10.0)]
        for wider, narrower in zip(gaps, gaps[1:]):
            assert np.all(narrower <= wider)
            assert narrower[30] < wider[30]

    def test_gradient_matches_finite_difference(self):
        t = np.linspace(-5, 5, 21)
        h = 1e-6
        numeric = (softplus(t + h, 1.5) - softplus(t - h, 1.5)) / (2 * h)
        np.testing.assert_allclose(softplus_grad(t, 1.5), numeric, rtol=1e-6, atol=1e-9)

    def test_beta_must_be_positive(self):
        with pytest.raises(ContractViolation):
            softplus(1.0, beta=0.0)


class TestEncoderParams:
    """Test parameter containers."""

    def test_initialize_shapes(self):
        params = EncoderParams.initialize(5, 3, rng=np.random.default_rng(0))
        assert (params.m, params.k) == (5, 3)
        assert params.W_M.shape == params.W_S.shape == (5, 3)

    def test_initialize_is_seeded(self):
        first = EncoderParams.initialize(4, 2, rng=np.random.default_rng(1))
        second = EncoderParams.initialize(4, 2, rng=np.random.default_rng(1))
        assert first == second

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            EncoderParams(np.zeros((2, 3)), np.zeros((3, 2)))

    def test_non_finite_weights(self):
        with pytest.raises(ContractViolation):
            EncoderParams(np.array([[np.nan]]), np.zeros((1, 1)))

    def test_copy_is_independent(self):
        params = EncoderParams.initialize(2, 2, rng=np.random.default_rng(2))
        clone = params.copy()
        clone.W_M[0, 0] += 1.0
        assert clone != params

    def test_save_and_load(self, tmp_path):
        params = EncoderParams.initialize(6, 4, beta=2.0, rng=np.random.default_rng(3))
        path = tmp_path / "models" / "encoder.npz"

        params.save(str(path))
        loaded = EncoderParams.load(str(path))

        assert loaded == params
        assert loaded.beta == 2.0


class TestEncode:
    """Test feature encoding."""

    def test_single_vector(self):
        params = EncoderParams([[1.0, 0.0], [0.0, 2.0]], [[0.0, 0.0], [0.0, 0.0]])

        g = encode(params, [3.0, 1.0], "q1")

        np.testing.assert_allclose(g.mean, [3.0, 2.0])
        np.testing.assert_allclose(g.variance, [math.log(2.0)] * 2)
        assert g.id == "q1"

    def test_batch_matches_single(self):
        rng = np.random.default_rng(4)
        params = EncoderParams.initialize(6, 3, rng=rng)
        X = rng.normal(size=(5, 6))
        ids = [f"d{i}" for i in range(5)]

        batch = encode_batch(params, X, ids)

        for row, g in zip(X, batch):
            single = encode(params, row, g.id)
            np.testing.assert_allclose(g.mean, single.mean, rtol=1e-12)
            np.testing.assert_allclose(g.variance, single.variance, rtol=1e-12)

    def test_variances_are_positive(self):
        rng = np.random.default_rng(5)
        params = EncoderParams.initialize(4, 8, scale=2.0, rng=rng)
        for g in encode_batch(params, rng.normal(size=(50, 4)), [str(i) for i in range(50)]):
            assert np.all(g.variance > 0)

    def test_dimension_errors(self):
        params = EncoderParams.initialize(3, 2, rng=np.random.default_rng(6))
        with pytest.raises(DimensionMismatchError):
            encode(params, [1.0, 2.0])
        with pytest.raises(DimensionMismatchError):
            encode_batch(params, np.zeros((2, 4)), ["a", "b"])
        with pytest.raises(DimensionMismatchError):
            encode_batch(params, np.zeros((2, 3)), ["a"])

    def test_non_finite_features(self):
        params = EncoderParams.initialize(2, 2, rng=np.random.default_rng(7))
        with pytest.raises(ContractViolation):
            encode(params, [np.inf, 0.0])
        with pytest.raises(ContractViolation):
            encode_batch(params, [[np.nan, 0.0]], ["a"])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
