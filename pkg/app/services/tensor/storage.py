"""
DT3 v1 Tensor Files

Binary layout (all little-endian):

  offset  size  field
       0    12  magic  b"DT3-TENSOR\\0\\0"
      12     4  version (uint32, = 1)
      16    24  dims p1, p2, p3 (uint64 each)
      40  8·N   N = p1 p2 p3 IEEE-754 doubles, i3 fastest

Matrices are stored as the degenerate case p3 = 1. An optional sidecar
`<path>.json` carries {dims, seed, description}.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from app.errors import FormatError, ParameterError
from app.services.linalg import as_matrix
from app.services.tensor.tensor3 import as_tensor3, check_entry_count

logger = logging.getLogger(__name__)

MAGIC = b"DT3-TENSOR\x00\x00"
VERSION = 1
HEADER = struct.Struct("<12sI3Q")
VERSION_OFFSET = len(MAGIC)
DIMS_OFFSET = VERSION_OFFSET + 4

PathLike = Union[str, Path]


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def save_tensor(path: PathLike, X, seed: Optional[int] = None, description: Optional[str] = None) -> Path:
    """Write X in DT3 v1; a sidecar is written when seed or description is given."""
    X = as_tensor3(X)
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, *X.shape))
        fh.write(X.astype("<f8", copy=False).tobytes(order="C"))
    if seed is not None or description is not None:
        meta = {"dims": list(X.shape), "seed": seed, "description": description}
        sidecar_path(path).write_text(json.dumps(meta, indent=2))
    logger.debug("💾 [DT3] Wrote %s dims=%s", path, X.shape)
    return path


def load_tensor(path: PathLike) -> Tuple[np.ndarray, Optional[dict]]:
    """Read a DT3 v1 file and its sidecar metadata (None when absent)."""
    path = Path(path)
    data = path.read_bytes()

    if len(data) < HEADER.size:
        raise FormatError(f"truncated header ({len(data)} of {HEADER.size} bytes)", len(data))

    magic, version, p1, p2, p3 = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("bad magic", _first_mismatch(data, MAGIC))
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", VERSION_OFFSET)
    dims = (p1, p2, p3)
    for index, d in enumerate(dims):
        if d == 0:
            raise FormatError("zero dimension", DIMS_OFFSET + 8 * index)
    try:
        count = check_entry_count(dims)
    except ParameterError as exc:
        raise FormatError(str(exc), DIMS_OFFSET) from exc

    expected = HEADER.size + 8 * count
    if len(data) < expected:
        raise FormatError(f"truncated payload ({len(data)} of {expected} bytes)", len(data))
    if len(data) > expected:
        raise FormatError(f"{len(data) - expected} trailing bytes", expected)

    values = np.frombuffer(data, dtype="<f8", count=count, offset=HEADER.size)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise FormatError("non-finite entry", HEADER.size + 8 * int(bad[0]))
    X = as_tensor3(values.astype(np.float64).reshape(dims))

    meta = _read_sidecar(sidecar_path(path))
    logger.debug("📂 [DT3] Read %s dims=%s", path, dims)
    return X, meta


def save_matrix(path: PathLike, M, seed: Optional[int] = None, description: Optional[str] = None) -> Path:
    M = as_matrix(M)
    return save_tensor(path, M.reshape(M.shape[0], M.shape[1], 1), seed, description)


def load_matrix(path: PathLike) -> Tuple[np.ndarray, Optional[dict]]:
    X, meta = load_tensor(path)
    if X.shape[2] != 1:
        raise FormatError(f"expected a matrix file (p3 = 1), found dims {X.shape}", DIMS_OFFSET + 8 * 2)
    return as_matrix(X[:, :, 0]), meta


def _first_mismatch(data: bytes, magic: bytes) -> int:
    for i, (a, b) in enumerate(zip(data, magic)):
        if a != b:
            return i
    return min(len(data), len(magic))


def _read_sidecar(side: Path) -> Optional[dict]:
    if not side.exists():
        return None
    try:
        meta = json.loads(side.read_text())
    except (OSError, ValueError) as exc:
        raise FormatError(f"unreadable sidecar {side}: {exc}", 0) from exc
    if not isinstance(meta, dict):
        raise FormatError(f"sidecar {side} must hold a JSON object", 0)
    return meta
