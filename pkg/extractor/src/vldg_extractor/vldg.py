"""Writer for the VLDG embedding interchange format.

Layout (little-endian):

    magic   4 bytes  b"VLDG"
    version u16      1
    count   u32      rows
    dim     u32      vector dimensionality
    payload count*dim float32, row-major
    trailer UTF-8 JSON {"ids": [...], "domain": "...", "modality": "..."}
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"VLDG"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


def write_vldg(
    path: str | Path,
    vectors: np.ndarray,
    ids: list[str],
    domain: str,
    modality: str,
) -> None:
    vectors = np.ascontiguousarray(vectors, dtype=np.float32)
    if vectors.ndim != 2:
        raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
    if len(ids) != vectors.shape[0]:
        raise ValueError(f"{len(ids)} ids for {vectors.shape[0]} rows")
    if not np.all(np.isfinite(vectors)):
        raise ValueError("vectors contain non-finite entries")
    n, d = vectors.shape
    trailer = json.dumps(
        {"ids": list(ids), "domain": domain, "modality": modality},
        ensure_ascii=False, sort_keys=True,
    ).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, d))
        fh.write(vectors.tobytes(order="C"))
        fh.write(trailer)


def read_header(path: str | Path) -> tuple[int, int]:
    """(count, dim) from a VLDG file, for self-checks."""
    blob = Path(path).read_bytes()[:_HEADER.size]
    magic, version, count, dim = _HEADER.unpack(blob)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"not a VLDG v{VERSION} file")
    return count, dim
