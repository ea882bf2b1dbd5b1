"""Logging utilities for the retrieval engine."""

import logging
import sys
from typing import Optional, TextIO


def setup_logger(
    name: str = "mvn_retrieval",
    level: int = logging.INFO,
    log_file: Optional[str] = None,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """
    Configure and return a logger instance.
    
    Args:
        name: Logger name
        level: Logging level
        log_file: Optional file to log to
        stream: Console stream (stderr by default, so stdout stays parseable)
    
    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    
    # Console handler
    if not logger.handlers:
        console_handler = logging.StreamHandler(stream or sys.stderr)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)
    for handler in logger.handlers:
        handler.setLevel(level)
    
    # File handler
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    
    return logger


def get_logger(name: str = "mvn_retrieval") -> logging.Logger:
    """Get a logger instance by name, nested under the package logger."""
    if name != "mvn_retrieval" and not name.startswith("mvn_retrieval."):
        name = f"mvn_retrieval.{name}"
    return logging.getLogger(name)


__all__ = ["setup_logger", "get_logger"]
