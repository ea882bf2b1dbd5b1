"""Exception hierarchy for the retrieval engine.

Every error carries a stable ``code`` so the CLI can emit a single
machine-parsable line (``error[CODE]: message``).
"""

from __future__ import annotations

from typing import Optional


class MvnrError(Exception):
    """Base class for all engine errors."""

    code = "ERROR"

    def __str__(self) -> str:
        return " ".join(str(arg) for arg in self.args) or self.__class__.__name__


class ContractViolation(MvnrError, ValueError):
    """A pre-condition of an operation was not met."""

    code = "CONTRACT"


class DimensionMismatchError(ContractViolation):
    """Two vectors or embeddings disagree on dimension."""

    code = "DIMENSION"


class EmbeddingValidationError(ContractViolation):
    """An embedding violates the diagonal-Gaussian invariants."""

    code = "INVALID_EMBEDDING"

    def __init__(self, message: str, record_id: Optional[str] = None):
        if record_id is not None:
            message = f"{message} (id={record_id})"
        super().__init__(message)
        self.record_id = record_id


class TransformRangeError(MvnrError, OverflowError):
    """A variance log-sum lies outside the representable guard band."""

    code = "RANGE"


class DuplicateIdError(MvnrError):
    """The same id appears twice in one corpus or query batch."""

    code = "DUPLICATE_ID"

    def __init__(self, item_id: str, kind: str = "document"):
        super().__init__(f"duplicate {kind} id: {item_id}")
        self.item_id = item_id


class EmptyCorpusError(MvnrError):
    """An operation needs at least one document."""

    code = "EMPTY_CORPUS"


class IndexFormatError(MvnrError):
    """A persisted index is not a well-formed MVNR file."""

    code = "FORMAT"


class IndexVersionError(IndexFormatError):
    code = "VERSION"


class IndexTruncatedError(IndexFormatError):
    code = "TRUNCATED"


class IndexChecksumError(IndexFormatError):
    code = "CHECKSUM"


class ParseError(MvnrError):
    """A line in an input file could not be parsed."""

    code = "PARSE"

    def __init__(self, message: str, path: Optional[str] = None, line_no: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}:{line_no}: " if line_no is not None else f"{path}: "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line_no = line_no


class UndefinedResultError(MvnrError, ValueError):
    """A statistic is undefined for the given input (e.g. constant series)."""

    code = "UNDEFINED"


class TrainingError(MvnrError):
    """A training step produced a non-finite loss or gradient."""

    code = "TRAINING"


class ConfigError(MvnrError):
    """Configuration failed validation."""

    code = "CONFIG"

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        super().__init__("; ".join(errors))
        self.errors = list(errors)


class UsageError(MvnrError):
    """The command line could not be parsed."""

    code = "USAGE"


__all__ = [
    "MvnrError",
    "ContractViolation",
    "DimensionMismatchError",
    "EmbeddingValidationError",
    "TransformRangeError",
    "DuplicateIdError",
    "EmptyCorpusError",
    "IndexFormatError",
    "IndexVersionError",
    "IndexTruncatedError",
    "IndexChecksumError",
    "ParseError",
    "UndefinedResultError",
    "TrainingError",
    "ConfigError",
    "UsageError",
]
