"""Training inputs: feature vectors, teacher scores, qrels and first-stage pools."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..errors import DimensionMismatchError, EmptyCorpusError, ParseError
from ..evaluation.trec import Qrels, read_qrels, read_run
from ..utils.helpers import iter_data_lines, read_jsonl

TeacherScores = Dict[str, Dict[str, float]]


@dataclass
class FeatureTable:
    """Feature vectors keyed by id, stored as one matrix."""

    ids: List[str]
    matrix: np.ndarray
    _rows: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rows = {item_id: row for row, item_id in enumerate(self.ids)}

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._rows

    def __len__(self) -> int:
        return len(self.ids)

    def row(self, item_id: str) -> np.ndarray:
        return self.matrix[self._rows[item_id]]


def read_features(path: str) -> FeatureTable:
    """
    Read ``{"id": ..., "features": [...]}`` lines.

    Raises:
        ParseError: malformed line, missing field or non-finite value
        DimensionMismatchError: rows of different length
        EmptyCorpusError: no rows
    """
    ids: List[str] = []
    rows: List[np.ndarray] = []
    for line_no, obj in read_jsonl(path):
        if "id" not in obj or "features" not in obj:
            raise ParseError("expected fields 'id' and 'features'", path, line_no)
        try:
            row = np.array(obj["features"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"features are not numeric ({exc})", path, line_no) from exc
        if row.ndim != 1 or not np.all(np.isfinite(row)):
            raise ParseError("features must be a flat list of finite numbers", path, line_no)
        if rows and row.size != rows[0].size:
            raise DimensionMismatchError(
                f"{path}:{line_no}: {obj['id']} has {row.size} features, expected {rows[0].size}"
            )
        ids.append(str(obj["id"]))
        rows.append(row)
    if not rows:
        raise EmptyCorpusError(f"no feature rows in {path}")
    return FeatureTable(ids, np.vstack(rows))


def read_teacher_scores(path: str) -> TeacherScores:
    """Read tab-separated ``query_id doc_id score`` lines."""
    scores: TeacherScores = {}
    for line_no, line in iter_data_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated columns, got {len(parts)}", path, line_no)
        qid, doc_id, value_text = (part.strip() for part in parts)
        try:
            value = float(value_text)
        except ValueError as exc:
            raise ParseError(f"score is not a number: {value_text!r}", path, line_no) from exc
        if not math.isfinite(value):
            raise ParseError(f"non-finite teacher score {value_text}", path, line_no)
        scores.setdefault(qid, {})[doc_id] = value
    return scores


def write_teacher_scores(path: str, scores: TeacherScores) -> int:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for qid, per_doc in scores.items():
            for doc_id, value in per_doc.items():
                f.write(f"{qid}\t{doc_id}\t{value!r}\n")
                count += 1
    return count


def read_pools(path: str, depth: int = 100) -> Dict[str, List[str]]:
    """First-stage candidate pools: the top ``depth`` documents per query of a run."""
    return {qid: [r.doc_id for r in records[:depth]] for qid, records in read_run(path).items()}


@dataclass
class TrainingData:
    """Everything the trainer reads from disk."""

    doc_features: FeatureTable
    query_features: FeatureTable
    qrels: Qrels
    teacher: TeacherScores
    bm25_pools: Dict[str, List[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.doc_features.m != self.query_features.m:
            raise DimensionMismatchError(
                f"documents have {self.doc_features.m} features, queries have {self.query_features.m}"
            )

    @property
    def m(self) -> int:
        return self.doc_features.m

    def training_queries(self) -> List[str]:
        """Queries with features, at least one judged-relevant document and teacher scores."""
        return [
            qid
            for qid in self.query_features.ids
            if qid in self.teacher and any(g >= 1 for g in self.qrels.get(qid, {}).values())
        ]

    @classmethod
    def from_files(
        cls,
        doc_features: str,
        query_features: str,
        qrels: str,
        teacher_scores: str,
        bm25_run: Optional[str] = None,
        pool_depth: int = 100,
    ) -> "TrainingData":
        return cls(
            read_features(doc_features),
            read_features(query_features),
            read_qrels(qrels),
            read_teacher_scores(teacher_scores),
            read_pools(bm25_run, pool_depth) if bm25_run else {},
        )


__all__ = [
    "TeacherScores",
    "FeatureTable",
    "read_features",
    "read_teacher_scores",
    "write_teacher_scores",
    "read_pools",
    "TrainingData",
]
