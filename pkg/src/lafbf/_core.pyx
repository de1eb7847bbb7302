# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: band-plan DP, active-band lookup and the pixel loop.

Same arithmetic, in the same order, as ``_pycore``.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport fabs, fmod, sqrt, exp, M_PI

cnp.import_array()

cdef double HALF_PI = 0.5 * M_PI


cdef inline double _reduce(double a) noexcept nogil:
    a = fmod(a, M_PI)
    if a > HALF_PI:
        a -= M_PI
    if a <= -HALF_PI:
        a += M_PI
    return a


cdef inline double _dist(double theta, double alpha0) noexcept nogil:
    cdef double d = fmod(theta - alpha0, M_PI)
    if d > HALF_PI:
        d -= M_PI
    if d < -HALF_PI:
        d += M_PI
    return fabs(d)


cdef inline Py_ssize_t _lower_bound(const double[::1] th, double x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = th.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if th[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline void _range(const double[::1] th, double a0, double hw,
                        Py_ssize_t* start, Py_ssize_t* count) noexcept nogil:
    cdef Py_ssize_t n = th.shape[0], s, nxt, prev, c, steps
    if hw >= HALF_PI:
        start[0] = 0
        count[0] = n
        return
    s = _lower_bound(th, _reduce(a0 - hw)) % n
    nxt = (s + 1) % n
    if _dist(th[s], a0) > hw and _dist(th[nxt], a0) <= hw:
        s = nxt
    steps = 0
    while steps < n:
        prev = (s - 1 + n) % n
        if _dist(th[prev], a0) > hw:
            break
        s = prev
        steps += 1
    c = 0
    while c < n and _dist(th[(s + c) % n], a0) <= hw:
        c += 1
    start[0] = s
    count[0] = c


def active_range(thetas, alpha0, double half_width):
    cdef const double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef const double[::1] a = np.ascontiguousarray(np.ravel(alpha0), dtype=np.float64)
    cdef Py_ssize_t m = a.shape[0], k, s, c
    out_s = np.empty(m, dtype=np.int64)
    out_c = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] vs = out_s
    cdef cnp.int64_t[::1] vc = out_c
    for k in range(m):
        _range(th, a[k], half_width, &s, &c)
        vs[k] = s
        vc[k] = c
    return out_s, out_c


def active_mask(thetas, alpha0, double half_width):
    start, count = active_range(thetas, alpha0, half_width)
    n = len(thetas)
    i = np.arange(n)
    return ((i[None, :] - start[:, None]) % n) < count[:, None]


cdef inline double _pixel(Py_ssize_t k1, Py_ssize_t k2, double a0,
                          const double[::1] th, const double[::1] bw,
                          const cnp.int64_t[::1] p, const cnp.int64_t[::1] q,
                          const cnp.int64_t[::1] base, const double[::1] lines,
                          double hw, double inv4s2, bint regularized) noexcept nogil:
    cdef Py_ssize_t n = th.shape[0], s, c, i, seg, a_lo, a_hi
    cdef double acc = 0.0, w, d
    _range(th, a0, hw, &s, &c)
    # ascending band index: [0, s+c-n) then [s, min(s+c, n))
    for seg in range(2):
        if seg == 0:
            a_lo = 0
            a_hi = s + c - n
            if a_hi < 0:
                a_hi = 0
        else:
            a_lo = s
            a_hi = s + c
            if a_hi > n:
                a_hi = n
        for i in range(a_lo, a_hi):
            w = bw[i]
            if regularized:
                d = _dist(th[i], a0)
                w = w * exp(-(d * d) * inv4s2)
            acc += w * lines[base[i] + k1 * q[i] + k2 * p[i]]
    return acc


def synth_kernel(alpha0, thetas, band_weights, p, q, base, lines,
                 double half_width, double sigma, bint regularized, int nthreads=1):
    cdef const double[:, ::1] a0 = np.ascontiguousarray(alpha0, dtype=np.float64)
    cdef const double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef const double[::1] bw = np.ascontiguousarray(band_weights, dtype=np.float64)
    cdef const cnp.int64_t[::1] pp = np.ascontiguousarray(p, dtype=np.int64)
    cdef const cnp.int64_t[::1] qq = np.ascontiguousarray(q, dtype=np.int64)
    cdef const cnp.int64_t[::1] bs = np.ascontiguousarray(base, dtype=np.int64)
    cdef const double[::1] ln = np.ascontiguousarray(lines, dtype=np.float64)
    cdef Py_ssize_t size = a0.shape[0], k1, k2
    cdef double inv4s2 = 1.0 / (4.0 * sigma * sigma) if regularized else 0.0
    out = np.zeros((size, size), dtype=np.float64)
    cdef double[:, ::1] X = out
    if nthreads < 1:
        nthreads = 1
    for k2 in prange(size, nogil=True, num_threads=nthreads, schedule="static"):
        for k1 in range(size):
            X[k2, k1] = _pixel(k1, k2, a0[k2, k1], th, bw, pp, qq, bs, ln,
                               half_width, inv4s2, regularized)
    return out


def synth_points(k1s, k2s, alpha0s, thetas, band_weights, p, q, base, lines,
                 double half_width, double sigma, bint regularized):
    """Turning-band sum at selected pixels (same arithmetic as ``synth_kernel``)."""
    cdef const cnp.int64_t[::1] K1 = np.ascontiguousarray(k1s, dtype=np.int64)
    cdef const cnp.int64_t[::1] K2 = np.ascontiguousarray(k2s, dtype=np.int64)
    cdef const double[::1] a0 = np.ascontiguousarray(alpha0s, dtype=np.float64)
    cdef const double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef const double[::1] bw = np.ascontiguousarray(band_weights, dtype=np.float64)
    cdef const cnp.int64_t[::1] pp = np.ascontiguousarray(p, dtype=np.int64)
    cdef const cnp.int64_t[::1] qq = np.ascontiguousarray(q, dtype=np.int64)
    cdef const cnp.int64_t[::1] bs = np.ascontiguousarray(base, dtype=np.int64)
    cdef const double[::1] ln = np.ascontiguousarray(lines, dtype=np.float64)
    cdef Py_ssize_t m = K1.shape[0], k
    cdef double inv4s2 = 1.0 / (4.0 * sigma * sigma) if regularized else 0.0
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] X = out
    for k in range(m):
        X[k] = _pixel(K1[k], K2[k], a0[k], th, bw, pp, qq, bs, ln,
                      half_width, inv4s2, regularized)
    return out


def select_chain(thetas, costs, weights, double epsilon):
    cdef const double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef const cnp.int64_t[::1] cost = np.ascontiguousarray(costs, dtype=np.int64)
    cdef const cnp.int64_t[::1] wt = np.ascontiguousarray(weights, dtype=np.int64)
    cdef Py_ssize_t n = th.shape[0], t, j, i, head, tail, best_t = -1
    cdef cnp.int64_t INF = -1, best_dp = -1, best_w = 0
    dp_arr = np.empty(n, dtype=np.int64)
    pred_arr = np.empty(n, dtype=np.int64)
    win_arr = np.empty(n, dtype=np.int64)
    best_pred_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] dp = dp_arr
    cdef cnp.int64_t[::1] pred = pred_arr
    cdef cnp.int64_t[::1] win = win_arr
    cdef cnp.int64_t[::1] best_pred = best_pred_arr
    cdef double start_limit
    with nogil:
        for t in range(n):
            if th[t] <= HALF_PI - epsilon:
                continue
            start_limit = th[t] - M_PI + epsilon
            head = 0
            tail = 0
            for j in range(t + 1):
                while head < tail and th[j] - th[win[head]] > epsilon:
                    head += 1
                pred[j] = -1
                if th[j] <= start_limit:
                    dp[j] = cost[j]
                elif head < tail:
                    i = win[head]
                    dp[j] = dp[i] + cost[j]
                    pred[j] = i
                else:
                    dp[j] = INF
                    continue
                while head < tail and (dp[win[tail - 1]] > dp[j] or
                        (dp[win[tail - 1]] == dp[j] and wt[win[tail - 1]] > wt[j])):
                    tail -= 1
                win[tail] = j
                tail += 1
            if dp[t] == INF:
                continue
            if best_t < 0 or dp[t] < best_dp or (dp[t] == best_dp and wt[t] < best_w):
                best_t = t
                best_dp = dp[t]
                best_w = wt[t]
                for j in range(t + 1):
                    best_pred[j] = pred[j]
    if best_t < 0:
        return None
    chain = []
    j = best_t
    while j >= 0:
        chain.append(int(j))
        j = best_pred[j]
    chain.reverse()
    return chain
