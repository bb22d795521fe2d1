"""Embedding table file formats.

Text: one record per line, ``label<TAB>f1 f2 ... fd``.

Binary: magic ``OLNS0001``, little-endian ``u32 n``, ``u32 d``, then ``n`` records of
``u32`` label byte length, UTF-8 label bytes and ``d`` little-endian float32 values.

Both loaders round coordinates to float32 once, so the two formats load to identical
tables.
"""

from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError
from .independence import EmbeddingTable

MAGIC = b"OLNS0001"
FORMATS = ("text", "binary")


def _build(labels, rows, where) -> EmbeddingTable:
    seen = {}
    for pos, label in enumerate(labels):
        if label in seen:
            raise InvalidInputError(f"duplicate label {label!r} ({where(seen[label])} and {where(pos)})")
        seen[label] = pos
    vecs = np.asarray(rows, dtype=np.float32).astype(np.float64)
    return EmbeddingTable(tuple(labels), vecs)


def parse_text_table(text: str) -> EmbeddingTable:
    labels, rows, lines = [], [], []
    dim = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        if "\t" not in raw:
            raise ParseError(f"line {lineno}: expected 'label<TAB>values'")
        label, _, payload = raw.partition("\t")
        if not label:
            raise ParseError(f"line {lineno}: empty label")
        try:
            values = [float(x) for x in payload.split()]
        except ValueError as exc:
            raise ParseError(f"line {lineno} (record {label!r}): {exc}") from None
        if not values:
            raise ParseError(f"line {lineno} (record {label!r}): no coordinates")
        if not all(math.isfinite(x) for x in values):
            raise ParseError(f"line {lineno}: record {label!r} has a non-finite coordinate")
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise ParseError(f"line {lineno} (record {label!r}): {len(values)} coordinates, expected {dim}")
        labels.append(label)
        rows.append(values)
        lines.append(lineno)
    if not labels:
        raise ParseError("embedding file contains no records")
    return _build(labels, rows, lambda pos: f"line {lines[pos]}")


def parse_binary_table(data: bytes) -> EmbeddingTable:
    if len(data) < 16 or data[:8] != MAGIC:
        raise ParseError("offset 0: missing OLNS0001 magic header")
    n, d = struct.unpack_from("<II", data, 8)
    if n == 0:
        raise ParseError("offset 8: table declares zero records")
    if d == 0:
        raise ParseError("offset 12: table declares zero dimensions")
    offset = 16
    labels, rows, offsets = [], [], []
    for rec in range(n):
        if offset + 4 > len(data):
            raise ParseError(f"offset {offset}: truncated record {rec}")
        (length,) = struct.unpack_from("<I", data, offset)
        start = offset
        offset += 4
        if offset + length + 4 * d > len(data):
            raise ParseError(f"offset {start}: truncated record {rec}")
        try:
            label = data[offset:offset + length].decode("utf-8")
        except UnicodeDecodeError:
            raise ParseError(f"offset {offset}: label of record {rec} is not valid UTF-8") from None
        offset += length
        values = np.frombuffer(data, dtype="<f4", count=d, offset=offset)
        offset += 4 * d
        if not np.all(np.isfinite(values)):
            raise ParseError(f"offset {start}: record {label!r} has a non-finite coordinate")
        labels.append(label)
        rows.append(values)
        offsets.append(start)
    if offset != len(data):
        raise ParseError(f"offset {offset}: {len(data) - offset} trailing bytes")
    return _build(labels, np.vstack(rows), lambda pos: f"offset {offsets[pos]}")


def load_table(path, fmt: str = "text") -> EmbeddingTable:
    """Read an embedding table in ``text`` or ``binary`` format."""
    path = Path(path)
    if fmt not in FORMATS:
        raise InvalidInputError(f"unknown format {fmt!r}; choose from {FORMATS}")
    try:
        if fmt == "text":
            return parse_text_table(path.read_text(encoding="utf-8"))
        return parse_binary_table(path.read_bytes())
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def dump_binary_table(table: EmbeddingTable) -> bytes:
    out = [MAGIC, struct.pack("<II", table.n, table.dim)]
    vecs = table.vectors.astype("<f4")
    for label, row in zip(table.labels, vecs):
        raw = label.encode("utf-8")
        out.append(struct.pack("<I", len(raw)))
        out.append(raw)
        out.append(row.tobytes())
    return b"".join(out)


def dump_text_table(table: EmbeddingTable) -> str:
    # repr of the float32 value round-trips exactly through float32 parsing
    lines = []
    for label, row in zip(table.labels, table.vectors.astype(np.float32)):
        lines.append(label + "\t" + " ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def save_table(table: EmbeddingTable, path, fmt: str = "text") -> None:
    path = Path(path)
    if fmt == "text":
        path.write_text(dump_text_table(table), encoding="utf-8")
    elif fmt == "binary":
        path.write_bytes(dump_binary_table(table))
    else:
        raise InvalidInputError(f"unknown format {fmt!r}; choose from {FORMATS}")
