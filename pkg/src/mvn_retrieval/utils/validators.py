"""Contract checks shared by the numeric modules."""

from typing import Sequence

import numpy as np

from ..errors import ContractViolation, DimensionMismatchError


def as_finite_vector(values, name: str = "vector") -> np.ndarray:
    """
    Convert ``values`` to a 1-D float64 array and require finite entries.
    
    Args:
        values: Sequence or array of numbers
        name: Name used in error messages
    
    Returns:
        A new float64 array
    """
    try:
        array = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ContractViolation(f"{name} is not numeric: {exc}") from exc
    if array.ndim != 1:
        raise ContractViolation(f"{name} must be one-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ContractViolation(f"{name} contains non-finite values")
    return array


def require_same_length(left: Sequence, right: Sequence, what: str = "inputs") -> int:
    """Raise if the two sequences differ in length; return the common length."""
    if len(left) != len(right):
        raise DimensionMismatchError(
            f"{what} differ in length: {len(left)} != {len(right)}"
        )
    return len(left)


def require_positive(value, name: str) -> None:
    """Raise unless ``value`` is a positive number."""
    if not value > 0:
        raise ContractViolation(f"{name} must be positive, got {value!r}")


__all__ = ["as_finite_vector", "require_same_length", "require_positive"]
