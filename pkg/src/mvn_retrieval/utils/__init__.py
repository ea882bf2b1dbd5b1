"""Utility functions and helpers."""

from .logger import setup_logger, get_logger
from .validators import as_finite_vector, require_same_length, require_positive
from .helpers import read_jsonl, write_jsonl, read_yaml

__all__ = [
    "setup_logger",
    "get_logger",
    "as_finite_vector",
    "require_same_length",
    "require_positive",
    "read_jsonl",
    "write_jsonl",
    "read_yaml",
]
