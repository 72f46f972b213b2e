"""
ADAptation Checkpoints
======================
Versioned binary container for trained heads and cluster models.

LAYOUT (little-endian):
    magic        8 bytes   b"ADAPTCK1"
    version      uint32
    header_len   uint32
    header       UTF-8 JSON (sorted keys): kind, meta, array table
    payload      arrays back to back, C order, dtype as listed in the table

Writers are deterministic: identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np

from guards import BadMagic, CheckpointMismatch, DataIOError, ParseError, Truncated

from .features import PathLike

CKPT_MAGIC = b"ADAPTCK1"
CKPT_VERSION = 1
_PREFIX = struct.Struct("<8sII")
_DTYPES = {"f8": np.dtype("<f8"), "i8": np.dtype("<i8")}


def _dtype_code(arr: np.ndarray) -> str:
    return "i8" if np.issubdtype(arr.dtype, np.integer) else "f8"


def write_checkpoint(
    path: PathLike,
    kind: str,
    meta: Dict[str, Any],
    arrays: Dict[str, np.ndarray],
) -> None:
    table = []
    blobs = []
    for name, arr in arrays.items():
        code = _dtype_code(np.asarray(arr))
        data = np.ascontiguousarray(arr, dtype=_DTYPES[code])
        table.append({"name": name, "dtype": code, "shape": list(data.shape)})
        blobs.append(data.tobytes(order="C"))

    header = json.dumps(
        {"kind": kind, "meta": meta, "arrays": table},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")

    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(_PREFIX.pack(CKPT_MAGIC, CKPT_VERSION, len(header)))
            fh.write(header)
            for blob in blobs:
                fh.write(blob)
    except OSError as exc:
        raise DataIOError(f"cannot write checkpoint {path}: {exc}") from exc


def _array_table(header: Dict[str, Any], path: PathLike) -> List[Tuple[str, np.dtype, Tuple[int, ...]]]:
    if not isinstance(header.get("meta"), dict):
        raise ParseError(f"{path}: checkpoint header lacks a meta object")
    entries = header.get("arrays")
    if not isinstance(entries, list):
        raise ParseError(f"{path}: checkpoint header lacks an array table")
    table = []
    for entry in entries:
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str):
            raise ParseError(f"{path}: malformed array entry {entry!r}")
        if entry.get("dtype") not in _DTYPES:
            raise ParseError(f"{path}: array {entry['name']!r} has unknown dtype {entry.get('dtype')!r}")
        shape = entry.get("shape")
        if not isinstance(shape, list) or not all(isinstance(s, int) and s >= 0 for s in shape):
            raise ParseError(f"{path}: array {entry['name']!r} has bad shape {shape!r}")
        table.append((entry["name"], _DTYPES[entry["dtype"]], tuple(shape)))
    return table


def read_checkpoint(path: PathLike, kind: str) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Return (meta, arrays); the stored kind must equal ``kind``."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataIOError(f"cannot read checkpoint {path}: {exc}") from exc

    if data[: len(CKPT_MAGIC)] != CKPT_MAGIC:
        raise BadMagic(f"{path}: not an ADAPTCK1 checkpoint")
    if len(data) < _PREFIX.size:
        raise Truncated(f"{path}: checkpoint prefix is incomplete")
    _, version, header_len = _PREFIX.unpack_from(data, 0)
    if version != CKPT_VERSION:
        raise CheckpointMismatch(f"{path}: format version {version}, expected {CKPT_VERSION}")

    start = _PREFIX.size
    if len(data) < start + header_len:
        raise Truncated(f"{path}: header cut short")
    try:
        header = json.loads(data[start:start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: unreadable checkpoint header: {exc}") from exc
    if not isinstance(header, dict):
        raise ParseError(f"{path}: checkpoint header is not a JSON object")
    if header.get("kind") != kind:
        raise CheckpointMismatch(f"{path}: holds a {header.get('kind')!r} checkpoint, expected {kind!r}")

    arrays: Dict[str, np.ndarray] = {}
    offset = start + header_len
    for name, dtype, shape in _array_table(header, path):
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * dtype.itemsize
        if offset + nbytes > len(data):
            raise Truncated(f"{path}: array {name!r} cut short")
        arrays[name] = np.frombuffer(data, dtype=dtype, count=count, offset=offset).reshape(shape).copy()
        offset += nbytes
    if offset != len(data):
        raise Truncated(f"{path}: {len(data) - offset} trailing bytes after payload")
    return header["meta"], arrays
