"""Binary matrix files and the on-disk transform cache.

Matrix files are little-endian: a fixed header (magic, version, rows, cols)
followed by interleaved (re, im) float64 pairs, with a JSON sidecar holding
row labels and a payload checksum.  Round-trips are bit-exact.  The cache
keys entries by module, dimensions and a construction-version hash; a version
mismatch is a miss, never a silent reuse.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"PBTM"
FORMAT_VERSION = 1
CONSTRUCTION_VERSION = "pbtkit-build-1"

_HEADER = struct.Struct("<4sIQQ")


def save_matrix(path: str | os.PathLike, matrix: np.ndarray, labels: list | None = None) -> None:
    """Write a complex matrix and its JSON sidecar."""
    mat = np.ascontiguousarray(np.asarray(matrix, dtype=np.complex128))
    if mat.ndim != 2:
        raise ValueError("only matrices are stored")
    payload = mat.astype("<c16").tobytes()
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, mat.shape[0], mat.shape[1])
    path = Path(path)
    path.write_bytes(header + payload)
    sidecar = {
        "rows": mat.shape[0],
        "cols": mat.shape[1],
        "dtype": "complex-f64",
        "layout": "row-major",
        "endianness": "little",
        "checksum": hashlib.sha256(payload).hexdigest(),
        "labels": labels or [],
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar))


def load_matrix(path: str | os.PathLike) -> tuple[np.ndarray, dict]:
    """Read a matrix file back, validating header, length and checksum."""
    raw = Path(path).read_bytes()
    magic, version, rows, cols = _HEADER.unpack(raw[: _HEADER.size])
    if magic != MAGIC:
        raise ValueError("not a matrix file")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version}")
    payload = raw[_HEADER.size :]
    if len(payload) != rows * cols * 16:
        raise ValueError("payload length does not match header dimensions")
    meta_path = Path(str(path) + ".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    if meta.get("checksum") and meta["checksum"] != hashlib.sha256(payload).hexdigest():
        raise ValueError("payload checksum mismatch")
    mat = np.frombuffer(payload, dtype="<c16").reshape(rows, cols).copy()
    return mat, meta


def cache_dir() -> Path:
    return Path(os.environ.get("PBT_CACHE_DIR", ".cache"))


@dataclass(frozen=True)
class CacheEntry:
    module: str
    n: int
    d: int
    extra: str = ""

    def filename(self) -> str:
        tag = hashlib.sha256(
            f"{self.module}|{self.n}|{self.d}|{self.extra}|{CONSTRUCTION_VERSION}".encode()
        ).hexdigest()[:16]
        return f"{self.module}_n{self.n}_d{self.d}_{tag}.mat"


def cache_save(entry: CacheEntry, matrix: np.ndarray, labels: list | None = None) -> Path:
    base = cache_dir()
    base.mkdir(parents=True, exist_ok=True)
    path = base / entry.filename()
    save_matrix(path, matrix, labels)
    return path


def cache_load(entry: CacheEntry) -> tuple[np.ndarray, dict] | None:
    """None on miss; the version hash in the filename makes stale entries
    unreachable rather than silently reused."""
    path = cache_dir() / entry.filename()
    if not path.exists():
        return None
    try:
        return load_matrix(path)
    except ValueError:
        return None


def schur_labels(index) -> list:
    return [
        {"diagram": list(lam.rows), "copy": r, "path": list(tab.growth)}
        for lam, r, tab in index
    ]


def cached_schur_matrix(m: int, d: int, gauge_seed: int = 0) -> np.ndarray:
    """The m-qudit Schur transform, loaded from disk when available."""
    from .schur import build_schur

    entry = CacheEntry("schur", m, d, extra=f"gauge{gauge_seed}")
    hit = cache_load(entry)
    if hit is not None:
        return hit[0]
    t = build_schur(m, d, gauge_seed)
    cache_save(entry, t.matrix, schur_labels(t.index))
    return np.array(t.matrix)
