"""
MVNR binary index format (little-endian).

    header   magic "MVNR" | version u16 | kind u8 | reserved u8 | k u32 |
             count u64 | total file size u64
    vectors  count × (2k+2) float64, row-major
    ids      count × (length u32, UTF-8 bytes)
    graph    (kind 1 only) M u32 | ef_construction u32 | ef_search u32 |
             seed i64 (−1 for none) | entry u64 | layer count u32, then per
             layer: node count u32, per node: node u32 | degree u32 |
             neighbours u32 × degree
    trailer  CRC32 of everything above, u32

A file is either loaded completely or rejected with an
:class:`~mvn_retrieval.errors.IndexFormatError` subclass.
"""

from __future__ import annotations

import os
import struct
import zlib
from pathlib import Path
from typing import List, Union

import numpy as np

from ..errors import (
    IndexChecksumError,
    IndexFormatError,
    IndexTruncatedError,
    IndexVersionError,
)
from ..utils.logger import get_logger
from .base import BaseIndex, IndexParams
from .flat import FlatIndex
from .graph import GraphIndex

MAGIC = b"MVNR"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHBBIQQ")
GRAPH_PARAMS = struct.Struct("<IIIqQI")
TRAILER = struct.Struct("<I")
KIND_CODES = {"flat": 0, "graph": 1}

logger = get_logger("storage")


def _encode(index: BaseIndex) -> bytes:
    body = bytearray()
    body += index.vectors.astype("<f8", copy=False).tobytes(order="C")
    for doc_id in index.ids:
        raw = doc_id.encode("utf-8")
        body += struct.pack("<I", len(raw))
        body += raw
    if isinstance(index, GraphIndex):
        params = index.params
        body += GRAPH_PARAMS.pack(
            params.M,
            params.ef_construction,
            params.ef_search,
            -1 if params.seed is None else params.seed,
            index.entry_point,
            len(index.layers),
        )
        for layer in index.layers:
            body += struct.pack("<I", len(layer))
            for node, neighbors in layer.items():
                body += struct.pack(f"<II{len(neighbors)}I", node, len(neighbors), *neighbors)

    total = HEADER.size + len(body) + TRAILER.size
    header = HEADER.pack(
        MAGIC, FORMAT_VERSION, KIND_CODES[index.kind], 0, index.k, len(index), total
    )
    payload = header + bytes(body)
    return payload + TRAILER.pack(zlib.crc32(payload))


def save_index(index: BaseIndex, path: Union[str, os.PathLike]) -> None:
    """Persist ``index``; the file is written to a temporary name and renamed."""
    data = _encode(index)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, target)
    logger.info(f"Persisted {index.kind} index ({len(index)} documents) to {target}")


class _Reader:
    def __init__(self, data: bytes, offset: int, end: int):
        self.data = data
        self.offset = offset
        self.end = end

    def take(self, size: int) -> bytes:
        if self.offset + size > self.end:
            raise IndexTruncatedError("index file ends inside a record")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: Union[str, struct.Struct]):
        packer = fmt if isinstance(fmt, struct.Struct) else struct.Struct(fmt)
        return packer.unpack(self.take(packer.size))


def _decode(data: bytes) -> BaseIndex:
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise IndexFormatError("not an MVNR index (bad magic number)")
    if len(data) < HEADER.size:
        raise IndexTruncatedError("index file ends inside the header")
    _, version, kind_code, _, k, count, total = HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise IndexVersionError(f"unsupported index version {version} (expected {FORMAT_VERSION})")
    if len(data) < total:
        raise IndexTruncatedError(f"index file has {len(data)} bytes, header declares {total}")
    if len(data) > total:
        raise IndexFormatError(f"index file has {len(data) - total} trailing bytes")
    end = total - TRAILER.size
    (stored_crc,) = TRAILER.unpack_from(data, end)
    if zlib.crc32(data[:end]) != stored_crc:
        raise IndexChecksumError("index checksum mismatch; file is corrupt")
    kinds = {code: name for name, code in KIND_CODES.items()}
    if kind_code not in kinds:
        raise IndexFormatError(f"unknown index kind code {kind_code}")

    reader = _Reader(data, HEADER.size, end)
    width = 2 * k + 2
    vectors = np.frombuffer(reader.take(count * width * 8), dtype="<f8").astype(np.float64)
    vectors = vectors.reshape(count, width)
    ids: List[str] = []
    for _ in range(count):
        (length,) = reader.unpack("<I")
        try:
            ids.append(reader.take(length).decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise IndexFormatError(f"id table is not valid UTF-8: {exc}") from exc

    if kinds[kind_code] == "flat":
        index: BaseIndex = FlatIndex(ids, vectors)
    else:
        m, ef_construction, ef_search, seed, entry, n_layers = reader.unpack(GRAPH_PARAMS)
        layers = []
        for _ in range(n_layers):
            (n_nodes,) = reader.unpack("<I")
            layer = {}
            for _ in range(n_nodes):
                node, degree = reader.unpack("<II")
                layer[node] = list(reader.unpack(f"<{degree}I")) if degree else []
            layers.append(layer)
        try:
            params = IndexParams(m, ef_construction, ef_search, None if seed < 0 else seed)
        except ValueError as exc:
            raise IndexFormatError(f"invalid graph parameters: {exc}") from exc
        index = GraphIndex(ids, vectors, params, layers, entry)
        problems = index.check_invariants()
        if problems:
            raise IndexFormatError(f"graph structure is inconsistent: {problems[0]}")
    if reader.offset != end:
        raise IndexFormatError("unexpected bytes after index payload")
    return index


def load_index(path: Union[str, os.PathLike]) -> BaseIndex:
    """Load an index written by :func:`save_index`."""
    with open(path, "rb") as f:
        data = f.read()
    index = _decode(data)
    logger.info(f"Loaded {index.kind} index ({len(index)} documents, k={index.k}) from {path}")
    return index


__all__ = ["MAGIC", "FORMAT_VERSION", "save_index", "load_index"]
