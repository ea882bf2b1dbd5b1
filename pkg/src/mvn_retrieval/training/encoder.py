"""
Toy encoder: one linear projection per head on top of given feature vectors.

    mean     = x · W_M
    variance = softplus_β(x · W_S)

Queries and documents share the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import expit

from ..core.gaussian import GaussianEmbedding
from ..errors import ContractViolation, DimensionMismatchError
from ..utils.validators import as_finite_vector, require_positive


def softplus(t, beta: float = 1.0) -> np.ndarray:
    """
    (1/β)·log(1 + exp(β·t)), element-wise.

    Positive inputs use t + (1/β)·log1p(exp(−β·t)) so nothing overflows.
    """
    require_positive(beta, "beta")
    t = np.asarray(t, dtype=np.float64)
    flat = t.reshape(-1)
    bt = beta * flat
    positive = bt > 0
    out = np.empty_like(bt)
    out[positive] = flat[positive] + np.log1p(np.exp(-bt[positive])) / beta
    out[~positive] = np.log1p(np.exp(bt[~positive])) / beta
    return out.reshape(t.shape)


def softplus_grad(t, beta: float = 1.0) -> np.ndarray:
    """d/dt softplus_β(t) = sigmoid(β·t)."""
    return expit(beta * np.asarray(t, dtype=np.float64))


@dataclass
class EncoderParams:
    """
    Encoder weights.

    Attributes:
        W_M: Mean projection, shape (m, k)
        W_S: Variance projection, shape (m, k)
        beta: Softplus shape, > 0
    """

    W_M: np.ndarray
    W_S: np.ndarray
    beta: float = 1.0

    def __post_init__(self) -> None:
        self.W_M = np.array(self.W_M, dtype=np.float64)
        self.W_S = np.array(self.W_S, dtype=np.float64)
        if self.W_M.ndim != 2 or self.W_M.shape != self.W_S.shape:
            raise DimensionMismatchError(
                f"W_M {self.W_M.shape} and W_S {self.W_S.shape} must be equal-shaped matrices"
            )
        if not (np.all(np.isfinite(self.W_M)) and np.all(np.isfinite(self.W_S))):
            raise ContractViolation("encoder weights contain non-finite values")
        require_positive(self.beta, "beta")
        self.beta = float(self.beta)

    @property
    def m(self) -> int:
        return self.W_M.shape[0]

    @property
    def k(self) -> int:
        return self.W_M.shape[1]

    @classmethod
    def initialize(
        cls,
        m: int,
        k: int,
        beta: float = 1.0,
        scale: float = 0.1,
        rng: Optional[np.random.Generator] = None,
    ) -> "EncoderParams":
        """Gaussian initialization with standard deviation ``scale``."""
        rng = rng if rng is not None else np.random.default_rng()
        return cls(
            scale * rng.standard_normal((m, k)),
            scale * rng.standard_normal((m, k)),
            beta,
        )

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.W_M.copy(), self.W_S.copy(), self.beta)

    def save(self, path: str) -> None:
        """Write the weights to an ``.npz`` archive."""
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            np.savez(f, W_M=self.W_M, W_S=self.W_S, beta=np.array(self.beta))

    @classmethod
    def load(cls, path: str) -> "EncoderParams":
        with np.load(path) as archive:
            return cls(archive["W_M"], archive["W_S"], float(archive["beta"]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EncoderParams):
            return NotImplemented
        return (
            self.beta == other.beta
            and np.array_equal(self.W_M, other.W_M)
            and np.array_equal(self.W_S, other.W_S)
        )


def _heads(params: EncoderParams, X: np.ndarray):
    mean = X @ params.W_M
    activation = X @ params.W_S
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(activation))):
        raise ContractViolation("encoder activations are not finite")
    return mean, softplus(activation, params.beta)


def encode(params: EncoderParams, x, item_id: str = "") -> GaussianEmbedding:
    """Encode one feature vector."""
    x = as_finite_vector(x, "features")
    if x.size != params.m:
        raise DimensionMismatchError(f"features have length {x.size}, encoder expects {params.m}")
    mean, variance = _heads(params, x[None, :])
    return GaussianEmbedding(item_id, mean[0], variance[0])


def encode_batch(params: EncoderParams, X, ids: Sequence[str]) -> List[GaussianEmbedding]:
    """Encode the rows of ``X``; ``ids`` names each row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.m:
        raise DimensionMismatchError(f"feature matrix {X.shape} does not match m={params.m}")
    if X.shape[0] != len(ids):
        raise DimensionMismatchError(f"{X.shape[0]} feature rows but {len(ids)} ids")
    if not np.all(np.isfinite(X)):
        raise ContractViolation("feature matrix contains non-finite values")
    means, variances = _heads(params, X)
    return [GaussianEmbedding(i, mu, var) for i, mu, var in zip(ids, means, variances)]


__all__ = ["EncoderParams", "softplus", "softplus_grad", "encode", "encode_batch"]
