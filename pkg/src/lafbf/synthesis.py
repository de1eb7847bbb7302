"""Turning-band synthesis of elementary fields and LAFBF textures.

Each pixel ``(k1, k2)`` of the ``(r+1) x (r+1)`` grid sits at ``(k1/r, k2/r)``
in the unit square; ``values[k2, k1]`` holds its amplitude (rows follow y).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .bands import Band, BandPlan, plan_for
from .fbm_line import FbmLine, HurstIndex, RandomStream, circulant_eigenvalues, generate_fbm_line
from .orientation import AngularWeightParams, OrientationField, eval_alpha0

__all__ = [
    "SynthesisParams",
    "PreparedState",
    "FieldGrid",
    "gamma_factor",
    "precompute",
    "band_sample",
    "band_scale",
    "synthesize_elementary",
    "synthesize_lafbf",
    "synthesize_points",
    "alpha0_grid",
    "thread_count",
]


@dataclass(frozen=True)
class SynthesisParams:
    hurst: float = 0.2
    alpha: float = 0.1
    epsilon: float = 0.01
    grid_order: int = 255
    seed: int = 0
    regularized: bool = True
    sigma: float | None = None
    q_max: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "hurst", HurstIndex(self.hurst).value)
        r = int(self.grid_order)
        if r < 1 or (r + 1) & r:
            raise ValueError(f"grid_order must be 2^k - 1 (k >= 1), got {self.grid_order}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        # validates alpha and sigma
        object.__setattr__(self, "sigma", self.weight.sigma)

    @property
    def size(self) -> int:
        return self.grid_order + 1

    @property
    def weight(self) -> AngularWeightParams:
        return AngularWeightParams(self.alpha, self.regularized, self.sigma)

    def plan(self) -> BandPlan:
        return plan_for(float(self.epsilon), int(self.grid_order), self.q_max)


@dataclass(frozen=True)
class PreparedState:
    """Band plan and one FBM line per band, packed for the pixel kernel."""

    hurst: float
    seed: int
    plan: BandPlan
    lines: tuple[FbmLine, ...]
    flat: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)
    jmin: np.ndarray = field(repr=False)
    scales: np.ndarray = field(repr=False)

    def band_weights(self, hurst: float) -> np.ndarray:
        """``sqrt(lambda_i * gamma(H)) * scale_i`` per band."""
        return np.sqrt(self.plan.lambdas * gamma_factor(hurst)) * self.scales

    def matches(self, params: SynthesisParams) -> bool:
        return (
            self.hurst == params.hurst
            and self.seed == params.seed
            and self.plan.epsilon == params.epsilon
            and self.plan.grid_order == params.grid_order
        )


@dataclass(frozen=True)
class FieldGrid:
    values: np.ndarray
    params: SynthesisParams
    orientation: str
    plan_digest: str

    @property
    def size(self) -> tuple[int, int]:
        return self.values.shape


def gamma_factor(h: HurstIndex | float) -> float:
    H = HurstIndex(float(h)).value
    return math.pi / (H * math.gamma(2 * H) * math.sin(H * math.pi))


def thread_count() -> int:
    """Worker count from ``LAFBF_THREADS`` (0 or unset means all cores)."""
    raw = os.environ.get("LAFBF_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("LAFBF_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def band_scale(band: Band, H: float, r: int) -> float:
    if band.vertical:
        return (1.0 / r) ** H
    return (math.cos(band.theta) / (r * band.q)) ** H


def band_sample(line: FbmLine, band: Band, k1: int, k2: int, r: int) -> float:
    """Band FBM at the projection of pixel ``(k1, k2)``, rescaled to unit-square units."""
    assert 0 <= k1 <= r and 0 <= k2 <= r, "pixel outside grid"
    j = k1 * band.q + k2 * band.p
    assert line.j_min <= j <= line.j_max, "projection outside FBM line"
    return band_scale(band, line.hurst.value, r) * line[j]


def precompute(params: SynthesisParams, plan: BandPlan | None = None,
               threads: int | None = None) -> PreparedState:
    """Choose bands and draw one FBM line per band from substream ``(seed, i)``."""
    plan = params.plan() if plan is None else plan
    r = params.grid_order
    H = HurstIndex(params.hurst)
    master = RandomStream(params.seed)
    spectra: dict[int, np.ndarray] = {}
    ranges = [b.line_range(r) for b in plan.bands]
    for lo, hi in ranges:
        if hi - lo not in spectra:
            spectra[hi - lo] = circulant_eigenvalues(H, hi - lo)

    def draw(i: int) -> FbmLine:
        lo, hi = ranges[i]
        return generate_fbm_line(H, lo, hi, master.substream(i), spectra[hi - lo])

    workers = thread_count() if threads is None else threads
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            lines = tuple(pool.map(draw, range(len(plan))))
    else:
        lines = tuple(draw(i) for i in range(len(plan)))

    lengths = np.array([len(ln) for ln in lines], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.int64)
    flat = np.concatenate([ln.values for ln in lines])
    jmin = np.array([ln.j_min for ln in lines], dtype=np.int64)
    scales = np.array([band_scale(b, H.value, r) for b in plan.bands])
    return PreparedState(H.value, params.seed, plan, lines, flat, offsets, jmin, scales)


def alpha0_grid(orientation: OrientationField, r: int) -> np.ndarray:
    """Orientation sampled at ``(k1/r, k2/r)``; indexed ``[k2, k1]``."""
    k = np.arange(r + 1) / r
    X, Y = np.meshgrid(k, k, indexing="xy")
    return np.asarray(eval_alpha0(orientation, X, Y), dtype=float)


def _kernel_args(params: SynthesisParams, state: PreparedState) -> tuple:
    if not state.matches(params):
        raise ValueError("prepared state does not match synthesis parameters")
    plan = state.plan
    w = params.weight
    return (plan.thetas, state.band_weights(params.hurst), plan.p, plan.q,
            state.offsets - state.jmin, state.flat, w.half_width, w.sigma, w.regularized)


def _run(params: SynthesisParams, alpha0: np.ndarray, state: PreparedState,
         backend: str | None, threads: int | None) -> np.ndarray:
    kern = _backend if backend is None else _backend.get(backend)
    return kern.synth_kernel(alpha0, *_kernel_args(params, state),
                             thread_count() if threads is None else threads)


def synthesize_elementary(params: SynthesisParams, alpha0: float, state: PreparedState,
                          backend: str | None = None, threads: int | None = None) -> FieldGrid:
    """Stationary elementary field with global orientation ``alpha0``."""
    field_ = OrientationField.constant(alpha0)
    grid = np.full((params.size, params.size), field_.payload)
    values = _run(params, grid, state, backend, threads)
    return FieldGrid(values, params, field_.describe(), state.plan.digest())


def synthesize_lafbf(params: SynthesisParams, orientation: OrientationField,
                     state: PreparedState, backend: str | None = None,
                     threads: int | None = None) -> FieldGrid:
    """LAFBF: each pixel takes the tangent turning-band field at its own orientation."""
    grid = alpha0_grid(orientation, params.grid_order)
    values = _run(params, grid, state, backend, threads)
    return FieldGrid(values, params, orientation.describe(), state.plan.digest())


def synthesize_points(params: SynthesisParams, orientation: OrientationField,
                      state: PreparedState, k1, k2, backend: str | None = None) -> np.ndarray:
    """LAFBF values at selected pixels only; identical to the matching grid entries."""
    r = params.grid_order
    k1 = np.asarray(k1, dtype=np.int64)
    k2 = np.asarray(k2, dtype=np.int64)
    if k1.shape != k2.shape or k1.ndim != 1:
        raise ValueError("k1 and k2 must be 1-D arrays of equal length")
    if k1.size and (min(k1.min(), k2.min()) < 0 or max(k1.max(), k2.max()) > r):
        raise ValueError("pixel outside grid")
    a0 = np.asarray(eval_alpha0(orientation, k1 / r, k2 / r), dtype=float).reshape(-1)
    kern = _backend if backend is None else _backend.get(backend)
    return kern.synth_points(k1, k2, a0, *_kernel_args(params, state))
