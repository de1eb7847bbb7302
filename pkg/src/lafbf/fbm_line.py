"""Exact 1-D fractional Brownian motion on integer grids.

Samples are produced by circulant embedding of fractional Gaussian noise
(Davies-Harte) followed by prefix sums outward from the origin, so the
returned path is pinned at ``B(0) = 0`` by construction.

Normalization: ``Var B(t) = |t|^{2H}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HurstIndex",
    "FbmLine",
    "EmbeddingError",
    "RandomStream",
    "fbm_covariance",
    "fgn_autocovariance",
    "circulant_eigenvalues",
    "generate_fbm_line",
]

EIG_TOL = 1e-9


class EmbeddingError(ArithmeticError):
    """Circulant embedding produced a significantly negative eigenvalue."""


@dataclass(frozen=True)
class HurstIndex:
    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not (0.0 < v < 1.0):
            raise ValueError(f"Hurst index must lie in (0, 1), got {self.value!r}")
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


def _h(h: HurstIndex | float) -> float:
    return h.value if isinstance(h, HurstIndex) else HurstIndex(h).value


class RandomStream:
    """Seekable Gaussian source built on the counter-based Philox generator.

    Gaussian variates come from the Box-Muller transform applied to pairs of
    uniforms ``(u1, u2)``: ``sqrt(-2 log(1 - u1)) * (cos, sin)(2 pi u2)``.
    The transform is fixed so that a stream state always maps to the same
    normals, independent of numpy's own normal sampler.

    Substreams are keyed by ``(seed, index)`` through ``numpy.random.SeedSequence``
    (``spawn_key=(index,)``), so every band line has its own reproducible stream.
    """

    def __init__(self, seed: int = 0, index: int | None = None) -> None:
        if seed < 0 or seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = int(seed)
        self.index = index
        spawn_key = () if index is None else (int(index),)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def substream(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, index)

    def uniform(self, size: int) -> np.ndarray:
        return self._gen.random(size)

    def normal_pairs(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        """Two independent standard normal arrays of length ``size``."""
        u = self._gen.random(2 * size)
        radius = np.sqrt(-2.0 * np.log1p(-u[:size]))
        phase = 2.0 * np.pi * u[size:]
        return radius * np.cos(phase), radius * np.sin(phase)

    def normal(self, size: int) -> np.ndarray:
        a, b = self.normal_pairs((size + 1) // 2)
        return np.concatenate([a, b])[:size]


@dataclass(frozen=True)
class FbmLine:
    """FBM samples at integers ``j_min..j_max``; ``values[j - j_min]`` is B(j)."""

    hurst: HurstIndex
    j_min: int
    j_max: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if not (self.j_min <= 0 <= self.j_max):
            raise ValueError("FbmLine range must contain 0")
        if len(self.values) != self.j_max - self.j_min + 1:
            raise ValueError("values length does not match the index range")

    def __len__(self) -> int:
        return self.j_max - self.j_min + 1

    def __getitem__(self, j: int) -> float:
        if not (self.j_min <= j <= self.j_max):
            raise IndexError(f"index {j} outside [{self.j_min}, {self.j_max}]")
        return float(self.values[j - self.j_min])

    def at(self, j: np.ndarray) -> np.ndarray:
        return self.values[np.asarray(j) - self.j_min]


def fbm_covariance(h: HurstIndex | float, s: float, t: float) -> float:
    H2 = 2.0 * _h(h)
    return 0.5 * (abs(s) ** H2 + abs(t) ** H2 - abs(s - t) ** H2)


def fgn_autocovariance(h: HurstIndex | float, k):
    """Autocovariance of unit-step increments at integer lag(s) ``k``."""
    H2 = 2.0 * _h(h)
    k = np.abs(np.asarray(k, dtype=float))
    r = 0.5 * (np.abs(k + 1) ** H2 - 2.0 * k**H2 + np.abs(k - 1) ** H2)
    return float(r) if r.ndim == 0 else r


def _embedding_size(span: int) -> int:
    return 1 << max(1, (2 * span - 1).bit_length())


def circulant_eigenvalues(h: HurstIndex | float, span: int) -> np.ndarray:
    """Eigenvalues of the circulant embedding of ``span`` fGn samples.

    Small negative round-off (relative to the largest eigenvalue) is clamped
    to zero; anything below ``-EIG_TOL`` raises :class:`EmbeddingError`.
    """
    m = _embedding_size(span)
    half = m // 2
    lags = np.arange(half + 1)
    r = fgn_autocovariance(h, lags)
    row = np.concatenate([r, r[half - 1 : 0 : -1]])
    eig = np.fft.fft(row).real
    scale = eig.max()
    if eig.min() < -EIG_TOL * scale:
        raise EmbeddingError(
            f"circulant embedding failed: eigenvalue {eig.min():.3e} "
            f"(max {scale:.3e}) for H={_h(h)}, span={span}"
        )
    return np.maximum(eig, 0.0)


def generate_fbm_line(
    h: HurstIndex | float,
    j_min: int,
    j_max: int,
    rng_stream: RandomStream,
    eigenvalues: np.ndarray | None = None,
) -> FbmLine:
    """Exact FBM on ``j_min..j_max`` pinned at 0.

    ``eigenvalues`` may be passed to reuse a cached embedding spectrum of the
    right size.
    """
    hurst = h if isinstance(h, HurstIndex) else HurstIndex(h)
    if not (j_min <= 0 <= j_max) or j_max - j_min < 1:
        raise ValueError(f"invalid FBM range [{j_min}, {j_max}]")
    span = j_max - j_min
    eig = circulant_eigenvalues(hurst, span) if eigenvalues is None else eigenvalues
    m = len(eig)
    re, im = rng_stream.normal_pairs(m)
    w = np.sqrt(eig / m) * (re + 1j * im)
    increments = np.fft.fft(w).real[:span]

    zero = -j_min
    values = np.empty(span + 1)
    values[zero] = 0.0
    values[zero + 1 :] = np.cumsum(increments[zero:])
    if zero:
        values[:zero] = -np.cumsum(increments[zero - 1 :: -1])[::-1]
    return FbmLine(hurst, j_min, j_max, values)
