"""Orientation fields over the unit square and the angular weight.

Directions are taken modulo pi (a texture orientation has no arrow-head) and
always reported in (-pi/2, pi/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._pycore import periodic_distance, reduce_angle

__all__ = [
    "OrientationField",
    "AngularWeightParams",
    "WEIGHT_CUTOFF",
    "eval_alpha0",
    "angular_weight",
    "load_raster",
    "parse_orientation",
    "v3_potential",
    "v3_gradient",
]

WEIGHT_CUTOFF = 1e-8
KINDS = ("constant", "preset_v1", "preset_v2", "preset_v3", "raster", "gradient_of_raster")


@dataclass(frozen=True)
class AngularWeightParams:
    """Sector half-width ``alpha`` and optional Gaussian smoothing of the indicator."""

    alpha: float
    regularized: bool = False
    sigma: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= math.pi / 2):
            raise ValueError(f"alpha must lie in (0, pi/2], got {self.alpha!r}")
        if self.sigma is None:
            object.__setattr__(self, "sigma", float(self.alpha))
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def half_width(self) -> float:
        """Largest periodic distance with a nonzero (or above-cutoff) weight."""
        if not self.regularized:
            return self.alpha
        return self.sigma * math.sqrt(-2.0 * math.log(WEIGHT_CUTOFF))


def angular_weight(params: AngularWeightParams, alpha0, theta):
    d = periodic_distance(theta, alpha0)
    if params.regularized:
        w = np.exp(-(d * d) * (1.0 / (2.0 * params.sigma * params.sigma)))
    else:
        w = (d <= params.alpha).astype(float)
    return float(w) if np.ndim(w) == 0 else w


def v3_potential(x, y):
    a = 4.0 * np.asarray(x) - 2.0
    b = 4.0 * np.asarray(y) - 2.0
    return a * np.exp(-a * a - b * b)


def v3_gradient(x, y):
    a = 4.0 * np.asarray(x, dtype=float) - 2.0
    b = 4.0 * np.asarray(y, dtype=float) - 2.0
    e = np.exp(-a * a - b * b)
    return 4.0 * e * (1.0 - 2.0 * a * a), -8.0 * a * b * e


@dataclass(frozen=True)
class OrientationField:
    """The map ``(x, y) -> alpha0`` on ``[0, 1]^2``.

    ``payload`` is the angle for ``constant`` and a 2-D array (rows along y,
    columns along x) for the raster kinds.
    """

    kind: str
    payload: object = None
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown orientation kind {self.kind!r}")
        if self.kind == "constant":
            object.__setattr__(self, "payload", float(reduce_angle(float(self.payload))))
        elif self.kind in ("raster", "gradient_of_raster"):
            arr = np.array(self.payload, dtype=float)
            if arr.ndim != 2 or min(arr.shape) < 2:
                raise ValueError("raster payload must be a 2-D array of at least 2x2")
            arr.setflags(write=False)
            object.__setattr__(self, "payload", arr)

    @classmethod
    def constant(cls, angle: float) -> "OrientationField":
        return cls("constant", angle)

    @classmethod
    def preset(cls, name: str) -> "OrientationField":
        return cls(f"preset_{name.lower()}")

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.kind == "constant":
            return f"constant:{self.payload!r}"
        if self.kind.startswith("preset_"):
            return self.kind[len("preset_"):]
        return f"{self.kind}[{self.payload.shape[0]}x{self.payload.shape[1]}]"

    def __call__(self, x, y):
        return eval_alpha0(self, x, y)


def _bilinear(grid: np.ndarray, x, y):
    rows, cols = grid.shape
    gx = np.clip(np.asarray(x, dtype=float), 0.0, 1.0) * (cols - 1)
    gy = np.clip(np.asarray(y, dtype=float), 0.0, 1.0) * (rows - 1)
    c0 = np.minimum(np.floor(gx).astype(int), cols - 2)
    r0 = np.minimum(np.floor(gy).astype(int), rows - 2)
    fx = gx - c0
    fy = gy - r0
    return (
        grid[r0, c0] * (1 - fx) * (1 - fy)
        + grid[r0, c0 + 1] * fx * (1 - fy)
        + grid[r0 + 1, c0] * (1 - fx) * fy
        + grid[r0 + 1, c0 + 1] * fx * fy
    )


def _direction(vx, vy):
    """Angle of vector(s) mod pi; zero vectors inherit the previous value in scan order."""
    vx = np.asarray(vx, dtype=float)
    vy = np.asarray(vy, dtype=float)
    ang = reduce_angle(np.arctan2(vy, vx))
    zero = (vx == 0.0) & (vy == 0.0)
    if np.any(zero):
        flat = np.array(ang, dtype=float).ravel()
        zf = zero.ravel()
        last = 0.0
        for k in range(flat.size):
            if zf[k]:
                flat[k] = last
            else:
                last = flat[k]
        ang = flat.reshape(np.shape(ang))
    return ang


def eval_alpha0(field: OrientationField, x, y):
    """Local orientation at ``(x, y)`` in the unit square, reduced to (-pi/2, pi/2]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    kind = field.kind
    if kind == "constant":
        out = np.full(shape, field.payload)
    elif kind == "preset_v1":
        out = reduce_angle(np.broadcast_to(-np.pi / 2 + y, shape))
    elif kind == "preset_v2":
        out = reduce_angle(np.cos(36.0 * x * y))
    elif kind == "preset_v3":
        out = _direction(*np.broadcast_arrays(*v3_gradient(x, y)))
    elif kind == "raster":
        # interpolate doubled-angle unit vectors so the pi wrap stays continuous
        g = field.payload
        c = _bilinear(np.cos(2 * g), x, y)
        s = _bilinear(np.sin(2 * g), x, y)
        out = reduce_angle(0.5 * np.arctan2(s, c))
    else:
        gy_, gx_ = _raster_gradient(field.payload)
        out = _direction(_bilinear(gx_, x, y), _bilinear(gy_, x, y))
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def _raster_gradient(F: np.ndarray):
    rows, cols = F.shape
    return np.gradient(F, 1.0 / (rows - 1), 1.0 / (cols - 1))


def load_raster(path: str | Path) -> np.ndarray:
    """Read a plain-text grid: first line ``rows cols``, then row-major values."""
    tokens = Path(path).read_text().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    vals = np.array([float(t) for t in tokens[2:]])
    if vals.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} values, found {vals.size}")
    return vals.reshape(rows, cols)


def save_raster(path: str | Path, grid: np.ndarray) -> None:
    grid = np.asarray(grid, dtype=float)
    lines = [f"{grid.shape[0]} {grid.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in grid]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_orientation(spec: str) -> OrientationField:
    """Parse ``constant:<rad> | v1 | v2 | v3 | raster:<path> | gradient:<path>``."""
    s = spec.strip()
    low = s.lower()
    if low in ("v1", "v2", "v3"):
        return OrientationField.preset(low)
    kind, sep, arg = s.partition(":")
    kind = kind.lower()
    if not sep:
        raise ValueError(f"orientation {spec!r}: expected constant:<radians>, v1, v2, v3, "
                         "raster:<path> or gradient:<path>")
    if kind == "constant":
        return OrientationField("constant", float(arg), label=s)
    if kind == "raster":
        return OrientationField("raster", load_raster(arg), label=s)
    if kind == "gradient":
        return OrientationField("gradient_of_raster", load_raster(arg), label=s)
    raise ValueError(f"unknown orientation kind {kind!r}")
