"""TREC-style qrels, run files and per-query metric tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from ..errors import ContractViolation, ParseError
from ..utils.helpers import iter_data_lines

RUN_TAG = "mvn-retrieve"

Qrels = Dict[str, Dict[str, int]]


@dataclass(frozen=True)
class RunRecord:
    """One line of a run file."""

    query_id: str
    doc_id: str
    rank: int
    score: float
    tag: str = RUN_TAG

    def to_line(self) -> str:
        return f"{self.query_id} Q0 {self.doc_id} {self.rank} {self.score!r} {self.tag}"


Run = Dict[str, List[RunRecord]]


def read_qrels(path: str) -> Qrels:
    """Read ``qid 0 docid grade`` lines."""
    qrels: Qrels = {}
    for line_no, line in iter_data_lines(path):
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"expected 4 columns, got {len(parts)}", path, line_no)
        qid, _, doc_id, grade_text = parts
        try:
            grade = int(grade_text)
        except ValueError as exc:
            raise ParseError(f"grade is not an integer: {grade_text!r}", path, line_no) from exc
        if grade < 0:
            raise ParseError(f"negative grade {grade}", path, line_no)
        qrels.setdefault(qid, {})[doc_id] = grade
    return qrels


def write_qrels(path: str, qrels: Mapping[str, Mapping[str, int]]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for qid, judged in qrels.items():
            for doc_id, grade in judged.items():
                f.write(f"{qid} 0 {doc_id} {grade}\n")


def validate_run(run: Mapping[str, Sequence[RunRecord]]) -> None:
    """Ranks must be 1..n without gaps and scores non-increasing within a query."""
    for qid, records in run.items():
        for expected, record in enumerate(records, 1):
            if record.rank != expected:
                raise ContractViolation(
                    f"query {qid}: rank {record.rank} found where {expected} was expected"
                )
        for previous, current in zip(records, records[1:]):
            if current.score > previous.score:
                raise ContractViolation(
                    f"query {qid}: score increases from rank {previous.rank} to {current.rank}"
                )


def read_run(path: str) -> Run:
    """Read ``qid Q0 docid rank score tag`` lines, grouped and ordered by rank."""
    run: Run = {}
    for line_no, line in iter_data_lines(path):
        parts = line.split()
        if len(parts) != 6:
            raise ParseError(f"expected 6 columns, got {len(parts)}", path, line_no)
        qid, _, doc_id, rank_text, score_text, tag = parts
        try:
            record = RunRecord(qid, doc_id, int(rank_text), float(score_text), tag)
        except ValueError as exc:
            raise ParseError(f"bad rank or score ({exc})", path, line_no) from exc
        if not math.isfinite(record.score):
            raise ParseError(f"non-finite score {score_text}", path, line_no)
        run.setdefault(qid, []).append(record)
    for records in run.values():
        records.sort(key=lambda r: r.rank)
    try:
        validate_run(run)
    except ContractViolation as exc:
        raise ParseError(str(exc), path) from exc
    return run


def write_run(path: str, run: Mapping[str, Sequence[RunRecord]]) -> int:
    """Write a run file; returns the number of lines."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for records in run.values():
            for record in records:
                f.write(record.to_line() + "\n")
                count += 1
    return count


def records_from_ranking(query_id: str, ranking: Iterable, tag: str = RUN_TAG) -> List[RunRecord]:
    """Turn ``(doc_id, score)`` pairs or search results into ranked records."""
    records = []
    for rank, item in enumerate(ranking, 1):
        doc_id, score = (item.doc_id, item.score) if hasattr(item, "doc_id") else item
        records.append(RunRecord(query_id, doc_id, rank, float(score), tag))
    return records


def format_per_query(metric: str, values: Mapping[str, float]) -> List[str]:
    """trec_eval-style ``metric qid value`` lines, queries in sorted order."""
    return [f"{metric}\t{qid}\t{values[qid]:.6f}" for qid in sorted(values)]


def read_per_query(path: str, metric: Optional[str] = None) -> Dict[str, float]:
    """
    Read per-query values.

    Accepts two-column ``qid value`` lines, or three-column
    ``metric qid value`` lines filtered by ``metric`` (``all`` rows skipped).
    """
    values: Dict[str, float] = {}
    for line_no, line in iter_data_lines(path):
        parts = line.split()
        if len(parts) == 2:
            qid, value_text = parts
        elif len(parts) == 3:
            name, qid, value_text = parts
            if qid == "all" or (metric is not None and name != metric):
                continue
        else:
            raise ParseError(f"expected 2 or 3 columns, got {len(parts)}", path, line_no)
        try:
            values[qid] = float(value_text)
        except ValueError as exc:
            raise ParseError(f"value is not a number: {value_text!r}", path, line_no) from exc
    return values


__all__ = [
    "RUN_TAG",
    "Qrels",
    "Run",
    "RunRecord",
    "read_qrels",
    "write_qrels",
    "read_run",
    "write_run",
    "validate_run",
    "records_from_ranking",
    "format_per_query",
    "read_per_query",
]
