"""Variogram oracles and Monte-Carlo estimators.

Convention throughout: ``v(x) = 1/2 E[(X(y + x) - X(y))^2]``.  Theoretical
lags are in unit-square coordinates; empirical lags are integer pixel
offsets ``(dk1, dk2)``, i.e. unit-square lag ``(dk1/r, dk2/r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .bands import BandPlan
from .fbm_line import HurstIndex
from .orientation import AngularWeightParams, OrientationField, angular_weight
from ._pycore import periodic_distance, reduce_angle
from .synthesis import FieldGrid, SynthesisParams, gamma_factor, precompute, synthesize_points

__all__ = [
    "VariogramEstimate",
    "EstimatorError",
    "theoretical_variogram",
    "discrete_variogram",
    "empirical_variogram",
    "local_variogram_lafbf",
    "local_variograms",
    "estimate_hurst",
    "fit_orientation",
]

HALF_PI = 0.5 * math.pi


class EstimatorError(ValueError):
    """The estimator is undefined for the given input."""


@dataclass(frozen=True)
class VariogramEstimate:
    lag: tuple[int, int]
    value: float
    std_error: float
    n_pairs: int


def _breakpoints(alpha0: float, weight: AngularWeightParams, x) -> list[float]:
    pts = [-HALF_PI, HALF_PI]
    # zero of x . u(theta): the |.|^{2H} cusp
    if x[0] != 0.0 or x[1] != 0.0:
        pts.append(float(reduce_angle(math.atan2(-x[0], x[1]))))
    if weight.regularized:
        # kink of the periodic distance and the Gaussian peak
        pts += [float(reduce_angle(alpha0)), float(reduce_angle(alpha0 + HALF_PI))]
    else:
        if weight.alpha < HALF_PI:
            pts += [float(reduce_angle(alpha0 - weight.alpha)),
                    float(reduce_angle(alpha0 + weight.alpha))]
    pts = sorted(set(min(max(p, -HALF_PI), HALF_PI) for p in pts))
    merged = [pts[0]]
    for p in pts[1:]:
        # slivers below 1e-12 rad carry no mass and upset the quadrature
        if p - merged[-1] > 1e-12:
            merged.append(p)
        else:
            merged[-1] = p if p == HALF_PI else merged[-1]
    if merged[-1] != HALF_PI:
        merged[-1] = HALF_PI
    return merged


def theoretical_variogram(h: HurstIndex | float, alpha0: float,
                          weight: AngularWeightParams, x) -> float:
    """``1/2 gamma(H) int_{-pi/2}^{pi/2} c(alpha0, theta) |x . u(theta)|^{2H} dtheta``.

    Adaptive Gauss-Kronrod quadrature, split at the sector edges (or the
    Gaussian peak and its antipode) and at the zero of ``x . u(theta)``.
    Requested relative accuracy is 1e-11 per panel.
    """
    H = HurstIndex(float(h)).value
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("lag must be finite")
    if x[0] == 0.0 and x[1] == 0.0:
        return 0.0
    H2 = 2.0 * H
    x0, x1 = float(x[0]), float(x[1])
    a0 = float(alpha0)
    inv2s2 = 1.0 / (2.0 * weight.sigma * weight.sigma)

    # scalar twin of angular_weight; quad calls this per node, numpy overhead dominates
    def f(t: float) -> float:
        d = math.fmod(t - a0, math.pi)
        if d > HALF_PI:
            d -= math.pi
        elif d < -HALF_PI:
            d += math.pi
        d = abs(d)
        if weight.regularized:
            c = math.exp(-d * d * inv2s2)
        else:
            c = 1.0 if d <= weight.alpha else 0.0
        return c * abs(x0 * math.cos(t) + x1 * math.sin(t)) ** H2

    pts = _breakpoints(alpha0, weight, x)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a <= 0.0:
            continue
        mid = 0.5 * (a + b)
        if not weight.regularized and angular_weight(weight, alpha0, mid) == 0.0:
            continue
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-11, limit=200)
        total += val
    return 0.5 * gamma_factor(H) * total


def discrete_variogram(h: HurstIndex | float, alpha0: float, weight: AngularWeightParams,
                       x, plan: BandPlan) -> float:
    """Exact variogram of the turning-band field built on ``plan``.

    ``1/2 gamma(H) sum_i lambda_i c_i |x . u(theta_i)|^{2H}``, with bands
    beyond the kernel's active half-width excluded as the kernel does.
    """
    H = HurstIndex(float(h)).value
    x = np.asarray(x, dtype=float)
    th = plan.thetas
    c = angular_weight(weight, alpha0, th)
    c = np.where(periodic_distance(th, alpha0) <= weight.half_width, c, 0.0)
    proj = np.abs(x[0] * np.cos(th) + x[1] * np.sin(th))
    return 0.5 * gamma_factor(H) * float(np.sum(plan.lambdas * c * proj ** (2.0 * H)))


def _values(g) -> np.ndarray:
    return np.asarray(g.values if isinstance(g, FieldGrid) else g, dtype=float)


def _shifted(v: np.ndarray, lx: int, ly: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = v.shape
    if abs(lx) >= cols or abs(ly) >= rows:
        raise ValueError(f"lag ({lx}, {ly}) exceeds grid size {v.shape}")
    ys = slice(max(0, -ly), rows - max(0, ly))
    xs = slice(max(0, -lx), cols - max(0, lx))
    ys2 = slice(ys.start + ly, ys.stop + ly)
    xs2 = slice(xs.start + lx, xs.stop + lx)
    return v[ys, xs], v[ys2, xs2]


def empirical_variogram(grids: Sequence, lags: Iterable, base: tuple[int, int] | None = None
                        ) -> list[VariogramEstimate]:
    """Monte-Carlo variogram over realizations.

    Stationary mode (``base=None``) averages over every pixel pair at the lag
    within each realization; with ``base=(k1, k2)`` only the pair
    ``(base, base + lag)`` is used.  ``std_error`` is the standard error of
    the per-realization values.
    """
    fields = [_values(g) for g in grids]
    if not fields:
        raise ValueError("need at least one grid")
    shape = fields[0].shape
    if any(f.shape != shape for f in fields):
        raise ValueError("grids must share one shape")
    out = []
    for lag in lags:
        lx, ly = int(lag[0]), int(lag[1])
        per = np.empty(len(fields))
        npairs = 0
        for s, f in enumerate(fields):
            if base is None:
                a, b = _shifted(f, lx, ly)
                per[s] = 0.5 * np.mean((b - a) ** 2)
                npairs += a.size
            else:
                k1, k2 = base
                if not (0 <= k1 + lx < shape[1] and 0 <= k2 + ly < shape[0]):
                    raise ValueError(f"lag ({lx}, {ly}) leaves the grid from {base}")
                per[s] = 0.5 * (f[k2 + ly, k1 + lx] - f[k2, k1]) ** 2
                npairs += 1
        se = float(per.std(ddof=1) / math.sqrt(len(per))) if len(per) > 1 else 0.0
        out.append(VariogramEstimate((lx, ly), float(per.mean()), se, npairs))
    return out


def local_variograms(params: SynthesisParams, field: OrientationField,
                     probes: Sequence[tuple[int, int]], lags: Sequence, n_seeds: int,
                     backend: str | None = None) -> dict[tuple[int, int], list[VariogramEstimate]]:
    """Local LAFBF variograms ``1/2 E[(X(x0 + lag) - X(x0))^2]`` at several probe pixels.

    Realization ``s`` uses seed ``params.seed + s``; only the probe pixels and
    their lag partners are evaluated.
    """
    r = params.grid_order
    probes = [(int(a), int(b)) for a, b in probes]
    lags = [(int(a), int(b)) for a, b in lags]
    k1, k2 = [], []
    for a, b in probes:
        for lx, ly in [(0, 0)] + lags:
            if not (0 <= a + lx <= r and 0 <= b + ly <= r):
                raise ValueError(f"lag ({lx}, {ly}) leaves the grid from {(a, b)}")
            k1.append(a + lx)
            k2.append(b + ly)
    k1 = np.array(k1)
    k2 = np.array(k2)
    m = len(lags) + 1
    sq = np.empty((n_seeds, len(probes), len(lags)))
    for s in range(n_seeds):
        p = replace(params, seed=params.seed + s)
        vals = synthesize_points(p, field, precompute(p), k1, k2, backend=backend)
        vals = vals.reshape(len(probes), m)
        sq[s] = 0.5 * (vals[:, 1:] - vals[:, :1]) ** 2
    mean = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / math.sqrt(n_seeds) if n_seeds > 1 else np.zeros_like(mean)
    return {
        probe: [VariogramEstimate(lags[j], float(mean[i, j]), float(se[i, j]), n_seeds)
                for j in range(len(lags))]
        for i, probe in enumerate(probes)
    }


def local_variogram_lafbf(params: SynthesisParams, field: OrientationField,
                          x0: tuple[int, int], lags: Sequence, n_seeds: int,
                          backend: str | None = None) -> list[VariogramEstimate]:
    return local_variograms(params, field, [x0], lags, n_seeds, backend)[tuple(x0)]


def fit_orientation(h: float, weight: AngularWeightParams, lags: Sequence,
                    values: Sequence[float], step: float = math.radians(0.25),
                    panels: int = 8192) -> float:
    """Orientation whose tangent variogram best fits ``values`` (least squares, free scale).

    Candidate profiles use a midpoint rule with ``panels`` nodes; the fit only
    has to resolve Monte-Carlo noise.  Returns ``alpha0`` in (-pi/2, pi/2];
    the direction of slowest variogram growth is ``alpha0 + pi/2``.
    """
    lags = np.asarray(lags, dtype=float)
    v = np.asarray(values, dtype=float)
    theta = -HALF_PI + (np.arange(panels) + 0.5) * (math.pi / panels)
    proj = np.abs(np.outer(np.cos(theta), lags[:, 0]) + np.outer(np.sin(theta), lags[:, 1]))
    proj **= 2.0 * float(h)
    cands = np.arange(-HALF_PI + step, HALF_PI + step / 2, step)
    c = angular_weight(weight, cands[:, None], theta[None, :])
    models = c @ proj  # common factors cancel in the free scale
    scale = (models @ v) / np.einsum("ij,ij->i", models, models)
    err = np.sum((v[None, :] - scale[:, None] * models) ** 2, axis=1)
    return float(reduce_angle(cands[int(np.argmin(err))]))


def estimate_hurst(grid, scales: Sequence[int] = (1, 2, 4, 8)) -> float:
    """Coarse Hurst estimate from second-order increments along rows.

    ``V(a) = mean (X[k + 2a] - 2 X[k + a] + X[k])^2 ~ a^{2H}``; the log-log
    slope over ``scales`` is ``2H``.  A sanity check, not an efficient estimator.
    """
    v = _values(grid)
    if min(v.shape) < 32:
        raise EstimatorError("grid must be at least 32 x 32")
    stats = []
    for a in scales:
        d = v[:, 2 * a:] - 2.0 * v[:, a:-a] + v[:, : -2 * a]
        stats.append(np.mean(d * d))
    stats = np.array(stats)
    if not np.all(stats > 0):
        raise EstimatorError("estimator undefined on a constant or degenerate grid")
    slope = np.polyfit(np.log(scales), np.log(stats), 1)[0]
    return float(np.clip(slope / 2.0, 1e-6, 1.0 - 1e-6))
