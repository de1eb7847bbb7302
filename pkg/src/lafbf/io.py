"""Grid file formats: raw float64 with a 16-byte header, binary PGM, CSV."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .synthesis import FieldGrid

__all__ = ["MAGIC", "RAW_VERSION", "write_grid", "read_raw", "to_pgm_bytes", "write_provenance"]

MAGIC = b"LAFB"
RAW_VERSION = 1
# magic, version u16, rows u16, cols u32, reserved u32
_HEADER = struct.Struct("<4sHHII")
FORMATS = ("pgm", "raw", "csv")


def _values(grid) -> np.ndarray:
    return np.asarray(grid.values if isinstance(grid, FieldGrid) else grid, dtype=np.float64)


def to_pgm_bytes(values: np.ndarray) -> bytes:
    """Binary P5, maxval 255, per-image affine map; constant images map to 128."""
    v = np.asarray(values, dtype=np.float64)
    rows, cols = v.shape
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        scaled = (v - lo) / (hi - lo) * 255.0
        pix = np.floor(scaled + 0.5)  # half away from zero (values are >= 0)
    else:
        pix = np.full(v.shape, 128.0)
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + pix.astype(np.uint8).tobytes()


def _raw_bytes(values: np.ndarray) -> bytes:
    rows, cols = values.shape
    if rows >= 2**16:
        raise ValueError("raw format supports at most 65535 rows")
    head = _HEADER.pack(MAGIC, RAW_VERSION, rows, cols, 0)
    return head + np.ascontiguousarray(values, dtype="<f8").tobytes()


def _csv_bytes(values: np.ndarray) -> bytes:
    lines = [",".join(repr(float(x)) for x in row) for row in values]
    return ("\n".join(lines) + "\n").encode("ascii")


def write_grid(grid, path: str | Path, fmt: str | None = None, force: bool = False) -> Path:
    """Write ``grid`` (FieldGrid or 2-D array) to ``path``.

    ``fmt`` defaults to the file suffix.  Existing files are only replaced
    with ``force=True``.
    """
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "raw").lower()
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists (use --force to overwrite)")
    values = _values(grid)
    if values.ndim != 2:
        raise ValueError("grid must be two-dimensional")
    data = {"pgm": to_pgm_bytes, "raw": _raw_bytes, "csv": _csv_bytes}[fmt](values)
    path.write_bytes(data)
    return path


def read_raw(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, rows, cols, _ = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != RAW_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    body = data[_HEADER.size:]
    if len(body) != 8 * rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} values")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64)


def write_provenance(grid: FieldGrid, path: str | Path) -> Path:
    """JSON sidecar with the synthesis parameters, orientation and band-plan digest."""
    p = grid.params
    meta = {
        "size": list(grid.size),
        "hurst": p.hurst,
        "alpha": p.alpha,
        "epsilon": p.epsilon,
        "grid_order": p.grid_order,
        "seed": p.seed,
        "regularized": p.regularized,
        "sigma": p.sigma,
        "q_max": p.q_max,
        "orientation": grid.orientation,
        "plan_digest": grid.plan_digest,
    }
    path = Path(path)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path
