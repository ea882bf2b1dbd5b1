"""Helper functions for file handling."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Tuple

import yaml

from ..errors import ParseError


__all__ = [
    "read_file",
    "read_json",
    "read_yaml",
    "read_jsonl",
    "write_jsonl",
    "iter_data_lines",
]


def read_file(file_path: str) -> str:
    """Read file contents."""
    with open(file_path, "r", encoding="utf-8") as f:
        return f.read()


def read_json(file_path: str) -> Dict[str, Any]:
    """Read JSON file."""
    return json.loads(read_file(file_path))


def read_yaml(file_path: str) -> Dict[str, Any]:
    """Read YAML file."""
    with open(file_path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def iter_data_lines(file_path: str) -> Iterator[Tuple[int, str]]:
    """Yield ``(line_no, stripped_line)`` for non-blank, non-comment lines."""
    with open(file_path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            yield line_no, line


def read_jsonl(file_path: str) -> List[Tuple[int, Dict[str, Any]]]:
    """
    Read a JSON-lines file.
    
    Returns:
        List of (line_no, object) pairs; line numbers are 1-based
    
    Raises:
        ParseError: on the first line that is not a JSON object
    """
    records = []
    for line_no, line in iter_data_lines(file_path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON ({exc.msg})", file_path, line_no) from exc
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", file_path, line_no)
        records.append((line_no, obj))
    return records


def write_jsonl(file_path: str, rows: Iterable[Dict[str, Any]]) -> int:
    """Write dictionaries as JSON lines; returns the number of rows written."""
    Path(file_path).parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(file_path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(json.dumps(row, separators=(",", ":")))
            f.write("\n")
            count += 1
    return count
