"""Rational turning-band directions and minimum-cost band plans.

A band is a direction ``theta = atan2(p, q)`` with coprime integers, so that
projections of the integer grid onto it land on integers ``k1*q + k2*p``.
The plan is the cheapest subset of candidate bands whose consecutive angular
gaps (including the pi-periodic wrap) never exceed ``epsilon``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import _backend

__all__ = [
    "Band",
    "BandPlan",
    "InfeasiblePlanError",
    "enumerate_candidates",
    "select_bands",
    "default_q_max",
    "plan_for",
    "max_gap",
]


class InfeasiblePlanError(ValueError):
    """No subset of the candidates covers the half circle within epsilon."""

    def __init__(self, gap: float, at: float, epsilon: float) -> None:
        self.gap = gap
        self.at = at
        self.epsilon = epsilon
        super().__init__(
            f"largest uncoverable gap {gap:.6g} rad (after theta={at:.6g}) exceeds "
            f"epsilon={epsilon:.6g}; raise q_max"
        )


@dataclass(frozen=True)
class Band:
    p: int
    q: int
    theta: float
    lam: float = 0.0
    cost: int = 0

    @property
    def weight(self) -> int:
        return abs(self.p) + abs(self.q)

    @property
    def vertical(self) -> bool:
        return self.q == 0

    def line_range(self, r: int) -> tuple[int, int]:
        """Integer range of ``k1*q + k2*p`` over ``0 <= k1, k2 <= r``."""
        if self.vertical:
            return 0, r
        return r * min(self.p, 0), r * (self.q + max(self.p, 0))


def _band(p: int, q: int) -> Band:
    return Band(p, q, math.atan2(p, q))


def enumerate_candidates(q_max: int) -> list[Band]:
    """All coprime ``(p, q)`` with ``|p| <= q_max``, ``1 <= q <= q_max``, plus ``(1, 0)``.

    Sorted by increasing angle.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    q = np.arange(1, q_max + 1)
    p = np.arange(-q_max, q_max + 1)
    P, Q = np.meshgrid(p, q, indexing="ij")
    keep = np.gcd(np.abs(P), Q) == 1
    P, Q = P[keep], Q[keep]
    order = np.argsort(np.arctan2(P, Q), kind="stable")
    bands = [_band(int(a), int(b)) for a, b in zip(P[order], Q[order])]
    bands.append(_band(1, 0))
    return bands


def max_gap(thetas) -> tuple[float, float]:
    """Largest circular gap of a sorted angle sequence and the angle it follows."""
    th = np.asarray(thetas, dtype=float)
    gaps = np.append(np.diff(th), th[0] + math.pi - th[-1])
    i = int(np.argmax(gaps))
    return float(gaps[i]), float(th[i])


@dataclass(frozen=True)
class BandPlan:
    bands: tuple[Band, ...]
    epsilon: float
    grid_order: int
    total_cost: int
    thetas: np.ndarray = field(repr=False, compare=False)
    lambdas: np.ndarray = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.bands)

    @property
    def p(self) -> np.ndarray:
        return np.array([b.p for b in self.bands], dtype=np.int64)

    @property
    def q(self) -> np.ndarray:
        return np.array([b.q for b in self.bands], dtype=np.int64)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.epsilon!r}|{self.grid_order}".encode())
        for b in self.bands:
            h.update(f"|{b.p},{b.q}".encode())
        return h.hexdigest()[:16]

    def to_csv(self) -> str:
        rows = ["p,q,theta,lambda,cost"]
        rows += [f"{b.p},{b.q},{b.theta!r},{b.lam!r},{b.cost}" for b in self.bands]
        return "\n".join(rows) + "\n"


def _make_plan(chosen: list[Band], epsilon: float, r: int) -> BandPlan:
    thetas = np.array([b.theta for b in chosen])
    lambdas = np.append(np.diff(thetas), thetas[0] + math.pi - thetas[-1])
    bands = tuple(
        replace(b, lam=float(lam), cost=r * b.weight + 1) for b, lam in zip(chosen, lambdas)
    )
    total = sum(b.cost for b in bands)
    return BandPlan(bands, float(epsilon), int(r), int(total), thetas, lambdas)


def select_bands(candidates: list[Band], epsilon: float, r: int) -> BandPlan:
    """Minimum-cost subset of ``candidates`` with every circular gap ``<= epsilon``.

    Cost of a band is its FBM sample count ``r*(|p|+|q|) + 1``.  Dynamic
    programming runs over the sorted candidates once per possible last band
    (those in ``(pi/2 - epsilon, pi/2]``; any feasible plan has one there).
    Among equal-cost chains the predecessor with smaller ``|p|+|q|`` wins,
    then the earlier angle.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not candidates:
        raise ValueError("no candidate bands")
    thetas = np.array([b.theta for b in candidates], dtype=float)
    if np.any(np.diff(thetas) <= 0):
        raise ValueError("candidates must be sorted by strictly increasing theta")
    gap, at = max_gap(thetas)
    if gap > epsilon:
        raise InfeasiblePlanError(gap, at, epsilon)
    weights = np.array([b.weight for b in candidates], dtype=np.int64)
    costs = r * weights + 1
    chosen = _backend.select_chain(thetas, costs, weights, float(epsilon))
    if chosen is None:
        raise InfeasiblePlanError(gap, at, epsilon)
    return _make_plan([candidates[i] for i in chosen], epsilon, r)


def default_q_max(epsilon: float) -> int:
    """Smallest doubling of ``ceil(2/epsilon)`` whose candidate set is epsilon-feasible."""
    q = max(1, math.ceil(2.0 / epsilon))
    while True:
        # largest gaps sit next to theta = 0 and theta = pi/2 and equal atan(1/q)
        if math.atan(1.0 / q) <= epsilon:
            th = [b.theta for b in enumerate_candidates(q)]
            if max_gap(th)[0] <= epsilon:
                return q
        q *= 2


@lru_cache(maxsize=32)
def plan_for(epsilon: float, r: int, q_max: int | None = None) -> BandPlan:
    """Band plan for a grid of order ``r`` (cached)."""
    q = default_q_max(epsilon) if q_max is None else q_max
    return select_bands(enumerate_candidates(q), epsilon, r)
