"""Pure numpy implementation of the hot kernels.

Mirrors ``_core.pyx`` operation for operation (same accumulation order per
pixel), so both backends agree to the last bit in sharp-indicator mode.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

PI = math.pi
HALF_PI = 0.5 * math.pi


def reduce_angle(a):
    """Reduce angle(s) modulo pi into (-pi/2, pi/2]."""
    a = np.fmod(a, PI)
    a = np.where(a > HALF_PI, a - PI, a)
    a = np.where(a <= -HALF_PI, a + PI, a)
    return a


def periodic_distance(theta, alpha0):
    """pi-periodic distance in [0, pi/2] between two directions."""
    d = np.fmod(np.subtract(theta, alpha0), PI)
    d = np.where(d > HALF_PI, d - PI, d)
    d = np.where(d < -HALF_PI, d + PI, d)
    return np.abs(d)


def select_chain(thetas, costs, weights, epsilon):
    n = len(thetas)
    best = None
    best_key = None
    for t in range(n):
        if thetas[t] <= HALF_PI - epsilon:
            continue
        start_limit = thetas[t] - PI + epsilon
        dp = [None] * (t + 1)
        pred = [-1] * (t + 1)
        window: deque[int] = deque()
        for j in range(t + 1):
            while window and thetas[j] - thetas[window[0]] > epsilon:
                window.popleft()
            if thetas[j] <= start_limit:
                dp[j] = int(costs[j])
            elif window:
                i = window[0]
                dp[j] = dp[i] + int(costs[j])
                pred[j] = i
            else:
                continue
            key = (dp[j], int(weights[j]))
            while window and (dp[window[-1]], int(weights[window[-1]])) > key:
                window.pop()
            window.append(j)
        if dp[t] is None:
            continue
        key = (dp[t], int(weights[t]), t)
        if best_key is None or key < best_key:
            best_key = key
            chain = [t]
            while pred[chain[-1]] >= 0:
                chain.append(pred[chain[-1]])
            best = chain[::-1]
    return best


def active_range(thetas, alpha0, half_width):
    """Circular index range ``(start, count)`` of bands within ``half_width`` of each alpha0.

    Vectorized binary search (``searchsorted``) followed by neighbour checks.
    """
    thetas = np.asarray(thetas, dtype=float)
    alpha0 = np.atleast_1d(np.asarray(alpha0, dtype=float))
    n = len(thetas)
    if half_width >= HALF_PI:
        return np.zeros(alpha0.shape, np.int64), np.full(alpha0.shape, n, np.int64)

    def active(idx):
        return periodic_distance(thetas[idx], alpha0) <= half_width

    lo = reduce_angle(alpha0 - half_width)
    s = np.searchsorted(thetas, lo, side="left") % n
    nxt = (s + 1) % n
    s = np.where(~active(s) & active(nxt), nxt, s)
    steps = 0
    while steps < n:
        prev = (s - 1) % n
        back = active(prev)
        if not back.any():
            break
        s = np.where(back, prev, s)
        steps += 1
    count = np.zeros(alpha0.shape, np.int64)
    alive = active(s)
    cur = s
    while alive.any():
        count += alive
        cur = (cur + 1) % n
        alive &= active(cur) & (count < n)
    return s.astype(np.int64), count


def synth_points(k1, k2, alpha0, thetas, band_weights, p, q, base, lines,
                 half_width, sigma, regularized):
    """Turning-band sum at pixels ``(k1[m], k2[m])`` with orientations ``alpha0[m]``.

    ``band_weights[i] = sqrt(lambda_i * gamma(H)) * scale_i`` and line ``i``
    sample ``j`` lives at ``lines[base[i] + j]``.  In regularized mode the
    weight is multiplied by ``sqrt(c) = exp(-d^2 / (4 sigma^2))``.
    """
    k1 = np.asarray(k1, dtype=np.int64)
    k2 = np.asarray(k2, dtype=np.int64)
    a0 = np.asarray(alpha0, dtype=float)
    n = len(thetas)
    start, count = active_range(thetas, a0, half_width)
    acc = np.zeros(a0.size)
    inv4s2 = 1.0 / (4.0 * sigma * sigma) if regularized else 0.0
    for i in range(n):
        on = np.flatnonzero((i - start) % n < count)
        if on.size == 0:
            continue
        idx = base[i] + k1[on] * q[i] + k2[on] * p[i]
        w = band_weights[i]
        if regularized:
            d = periodic_distance(thetas[i], a0[on])
            w = w * np.exp(-(d * d) * inv4s2)
        acc[on] += w * lines[idx]
    return acc


def synth_kernel(alpha0, thetas, band_weights, p, q, base, lines,
                 half_width, sigma, regularized, nthreads=1):
    """Turning-band sum for every pixel; ``alpha0[k2, k1]`` is the local orientation."""
    size = alpha0.shape[0]
    k2, k1 = np.divmod(np.arange(size * size, dtype=np.int64), size)
    a0 = np.ascontiguousarray(alpha0, dtype=float).ravel()
    out = synth_points(k1, k2, a0, thetas, band_weights, p, q, base, lines,
                       half_width, sigma, regularized)
    return out.reshape(size, size)


def active_mask(thetas, alpha0, half_width):
    """Boolean ``(pixels, bands)`` membership derived from :func:`active_range`."""
    n = len(thetas)
    start, count = active_range(thetas, np.ravel(alpha0), half_width)
    i = np.arange(n)
    return ((i[None, :] - start[:, None]) % n) < count[:, None]
