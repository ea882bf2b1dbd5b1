"""Configuration management for the retrieval engine."""

from .loader import ConfigLoader
from .settings import (
    Config,
    EvaluationSettings,
    IndexSettings,
    SearchSettings,
    SyntheticSettings,
    TrainingSettings,
)
from .validator import ConfigValidator

__all__ = [
    "ConfigLoader",
    "ConfigValidator",
    "Config",
    "IndexSettings",
    "TrainingSettings",
    "EvaluationSettings",
    "SearchSettings",
    "SyntheticSettings",
]
