"""Configuration validation."""

from dataclasses import fields
from typing import Any, Dict, List, Tuple

from ..utils.logger import get_logger
from .settings import SECTIONS, Config


class ConfigValidator:
    """Validate engine configurations."""

    VALID_SCORING = ["product", "trace"]
    VALID_INDEX_KINDS = ["flat", "graph"]
    VALID_QPP_REDUCTIONS = ["l2", "log_det", "trace"]
    VALID_QPP_METRICS = ["mrr@10", "ndcg@10", "map"]

    # (section or None for top level, key) -> rule
    POSITIVE = {
        (None, "k"), (None, "beta"),
        ("index", "M"), ("index", "ef_construction"), ("index", "ef_search"),
        ("training", "lr"), ("training", "total_steps"), ("training", "batch_size"),
        ("training", "hard_depth"), ("training", "init_scale"), ("training", "max_grad_norm"),
        ("training", "log_every"),
        ("evaluation", "map_threshold"), ("evaluation", "workers"),
        ("search", "workers"),
        ("synthetic", "k"), ("synthetic", "topics"), ("synthetic", "docs"),
        ("synthetic", "train_queries"), ("synthetic", "test_queries"),
        ("synthetic", "topic_spread"), ("synthetic", "teacher_depth"), ("synthetic", "pool_depth"),
    }
    NON_NEGATIVE = {
        (None, "seed"),
        ("training", "warmup_steps"), ("training", "m_positive"), ("training", "m_bm25"),
        ("training", "m_hard"), ("training", "refresh_every"),
        ("synthetic", "doc_noise"), ("synthetic", "query_noise"), ("synthetic", "variance_jitter"),
        ("synthetic", "nuisance_dims"), ("synthetic", "nuisance_scale"),
        ("synthetic", "distractor_scale"),
        ("synthetic", "teacher_noise"), ("synthetic", "pool_noise"), ("synthetic", "qpp_coupling"),
        ("synthetic", "graded_depth"),
    }

    @staticmethod
    def _check_type(where: str, value: Any, default: Any, errors: List[str]) -> bool:
        if isinstance(default, bool):
            ok = isinstance(value, bool)
        elif isinstance(default, int):
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif isinstance(default, float):
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        else:
            ok = isinstance(value, type(default))
        if not ok:
            errors.append(f"{where} must be of type {type(default).__name__}, got {value!r}")
        return ok

    @classmethod
    def _check_value(cls, section, key: str, where: str, value: Any, errors: List[str]) -> None:
        if (section, key) in cls.POSITIVE and not value > 0:
            errors.append(f"{where} must be positive, got {value!r}")
        if (section, key) in cls.NON_NEGATIVE and value < 0:
            errors.append(f"{where} must be non-negative, got {value!r}")
        choices = {
            (None, "scoring"): cls.VALID_SCORING,
            ("index", "kind"): cls.VALID_INDEX_KINDS,
            ("evaluation", "qpp_reduction"): cls.VALID_QPP_REDUCTIONS,
            ("evaluation", "qpp_metric"): cls.VALID_QPP_METRICS,
        }.get((section, key))
        if choices is not None and value not in choices:
            errors.append(f"Invalid {where}: {value}. Valid values: {choices}")

    @classmethod
    def validate(cls, config: Dict[str, Any]) -> Tuple[bool, List[str]]:
        """
        Validate a configuration dictionary.

        Unknown keys, wrong types and out-of-range values are all reported;
        missing keys are fine (defaults apply).

        Args:
            config: Configuration dictionary

        Returns:
            Tuple of (is_valid, error_messages)
        """
        errors: List[str] = []
        logger = get_logger("ConfigValidator")

        if not isinstance(config, dict):
            errors.append("Configuration must be a dictionary")
            return False, errors

        defaults = Config()
        top_level = {f.name for f in fields(Config)}
        for key, value in config.items():
            if key not in top_level:
                errors.append(f"Unknown configuration key: {key}")
                continue
            if key in SECTIONS:
                cls._validate_section(key, value, getattr(defaults, key), errors)
                continue
            if cls._check_type(key, value, getattr(defaults, key), errors):
                cls._check_value(None, key, key, value, errors)

        training = config.get("training")
        if isinstance(training, dict):
            warmup = training.get("warmup_steps", defaults.training.warmup_steps)
            total = training.get("total_steps", defaults.training.total_steps)
            if isinstance(warmup, int) and isinstance(total, int) and warmup > total:
                errors.append(f"training.warmup_steps ({warmup}) exceeds training.total_steps ({total})")

        is_valid = len(errors) == 0

        if not is_valid:
            logger.error(f"Configuration validation failed: {errors}")
        else:
            logger.debug("Configuration validation passed")

        return is_valid, errors

    @classmethod
    def _validate_section(cls, section: str, values: Any, defaults: Any, errors: List[str]) -> None:
        if values is None:
            return
        if not isinstance(values, dict):
            errors.append(f"{section} must be a mapping")
            return
        known = {f.name for f in fields(defaults)}
        for key, value in values.items():
            where = f"{section}.{key}"
            if key not in known:
                errors.append(f"Unknown configuration key: {where}")
                continue
            if cls._check_type(where, value, getattr(defaults, key), errors):
                cls._check_value(section, key, where, value, errors)


__all__ = ["ConfigValidator"]
