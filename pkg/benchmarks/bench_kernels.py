"""Compiled versus numpy kernels.

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 3] [--threads 1]

Times band selection, the active-range lookup and full-grid synthesis for
each available backend on the same prepared state, and checks that the
backends agree.
"""

import argparse
import math
import time

import numpy as np

from lafbf import _backend
from lafbf.bands import enumerate_candidates, default_q_max
from lafbf.orientation import OrientationField
from lafbf.synthesis import SynthesisParams, alpha0_grid, precompute, synthesize_lafbf


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    backends = ["python"]
    try:
        _backend.get("cython")
        backends.append("cython")
    except ImportError:
        print("compiled extension not built; timing the numpy backend only")

    t0 = time.perf_counter()
    base = SynthesisParams(grid_order=args.size - 1)
    state = precompute(base)
    print(f"precompute: {time.perf_counter() - t0:.2f} s, {len(state.plan)} bands, "
          f"{state.flat.size} FBM samples")

    cands = enumerate_candidates(default_q_max(base.epsilon))
    th = np.array([b.theta for b in cands])
    w = np.array([b.weight for b in cands], dtype=np.int64)
    costs = base.grid_order * w + 1
    field = OrientationField.preset("v2")
    a0 = alpha0_grid(field, base.grid_order).ravel()

    rows = []
    results = {}
    for name in backends:
        k = _backend.get(name)
        t_dp, _ = best_of(lambda: k.select_chain(th, costs, w, base.epsilon), 1)
        t_ar, _ = best_of(lambda: k.active_range(state.plan.thetas, a0, base.weight.half_width),
                          args.repeat)
        for reg in (False, True):
            p = SynthesisParams(grid_order=args.size - 1, regularized=reg)
            t_syn, g = best_of(lambda: synthesize_lafbf(p, field, state, backend=name,
                                                        threads=args.threads), args.repeat)
            results[name, reg] = g.values
            rows.append((name, "regularized" if reg else "sharp", t_dp, t_ar, t_syn))

    print(f"\n{'backend':8s} {'weight':12s} {'band DP':>9s} {'ranges':>9s} {'synthesis':>10s}")
    for name, mode, t_dp, t_ar, t_syn in rows:
        print(f"{name:8s} {mode:12s} {t_dp:8.3f}s {t_ar:8.3f}s {t_syn:9.3f}s")
    if len(backends) == 2:
        for reg in (False, True):
            diff = np.max(np.abs(results["python", reg] - results["cython", reg]))
            print(f"max |python - cython| ({'regularized' if reg else 'sharp'}): {diff:.2e}")
        by = {(n, m): s for n, m, _, _, s in rows}
        for mode in ("sharp", "regularized"):
            print(f"speedup {mode}: {by['python', mode] / by['cython', mode]:.1f}x")


if __name__ == "__main__":
    main()
