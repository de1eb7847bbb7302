"""Fast end-to-end sanity checks behind ``lafbf validate``.

Reduced-size versions of the statistical checks in the test suite; each
returns ``(name, passed, detail)``.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from . import _backend
from .bands import enumerate_candidates, plan_for, select_bands
from .fbm_line import RandomStream, fbm_covariance, generate_fbm_line
from .orientation import AngularWeightParams, OrientationField
from .synthesis import SynthesisParams, precompute, synthesize_elementary, synthesize_lafbf
from .validation import discrete_variogram, empirical_variogram, theoretical_variogram


def _fbm(seed: int):
    reps, H = 2000, 0.5
    stream = RandomStream(seed, 10**6)
    S = np.array([generate_fbm_line(H, 0, 16, stream).values for _ in range(reps)])
    worst = 0.0
    for s in (3, 8, 16):
        for t in (5, 16):
            prod = S[:, s] * S[:, t]
            z = abs(prod.mean() - fbm_covariance(H, s, t)) / (prod.std(ddof=1) / math.sqrt(reps))
            worst = max(worst, z)
    return "fbm covariance", worst < 4.0, f"max |z| = {worst:.2f} over 6 pairs, 2000 paths"


def _plan():
    plan = plan_for(0.01, 255)
    lam = plan.lambdas
    ok = lam.max() <= 0.01 and abs(lam.sum() - math.pi) < 1e-12
    small = select_bands(enumerate_candidates(2), math.pi, 3)
    return "band plan", ok and small.total_cost == 4, (
        f"{len(plan)} bands, max lambda {lam.max():.6f}, sum {lam.sum():.15f}")


def _riemann():
    plan = plan_for(0.01, 255)
    rng = np.random.default_rng(7)
    w = AngularWeightParams(0.1, True)
    worst = 0.0
    for _ in range(10):
        x = rng.uniform(-1, 1, 2)
        a0 = rng.uniform(-math.pi / 2, math.pi / 2)
        t = theoretical_variogram(0.2, a0, w, x)
        worst = max(worst, abs(discrete_variogram(0.2, a0, w, x, plan) - t) / t)
    return "riemann sum", worst <= 0.01, f"max relative error {worst:.2e}"


def _paths(seed: int):
    p = SynthesisParams(grid_order=31, seed=seed, regularized=False)
    st = precompute(p)
    a = synthesize_elementary(p, 0.4, st).values
    b = synthesize_lafbf(p, OrientationField.constant(0.4), st).values
    thetas = st.plan.thetas
    a0 = np.random.default_rng(seed).uniform(-math.pi / 2, math.pi / 2, 500)
    from ._pycore import periodic_distance

    lin = periodic_distance(thetas[None, :], a0[:, None]) <= 0.1
    same = np.array_equal(_backend.active_mask(thetas, a0, 0.1), lin)
    ok = a.tobytes() == b.tobytes() and a[0, 0] == 0.0 and same
    return "constant-field reduction", ok, "elementary == lafbf bitwise, binary search == linear scan"


def _variogram(seed: int):
    p = SynthesisParams(hurst=0.5, alpha=math.pi / 2, grid_order=31, seed=seed, regularized=False)
    grids = []
    for s in range(40):
        ps = replace(p, seed=seed + s)
        grids.append(synthesize_elementary(ps, 0.0, precompute(ps)))
    est = empirical_variogram(grids, [(4, 0), (0, 4)])
    worst = 0.0
    for e in est:
        t = theoretical_variogram(0.5, 0.0, p.weight, (e.lag[0] / 31, e.lag[1] / 31))
        worst = max(worst, abs(e.value - t) / t)
    return "isotropic variogram", worst < 0.2, f"max relative error {worst:.3f} (40 seeds, r=31)"


def run_checks(seed: int = 0):
    return [_fbm(seed), _plan(), _riemann(), _paths(seed), _variogram(seed)]
