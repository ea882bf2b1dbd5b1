"""Data generation scripts."""

from .synthetic import SyntheticDataset, SyntheticGenerator, generate_synthetic

__all__ = ["SyntheticDataset", "SyntheticGenerator", "generate_synthetic"]
