#!/usr/bin/env python3
"""Time the numba and numpy kernel backends on the halfplane preset.

Usage:
  python3 benchmarks/bench_kernels.py [--h 0.03125] [--repeat 5]
"""
import argparse
import time

import numpy as np

from besovtrace._backend import numba_available
from besovtrace.besov import interior_neighbors, level_range, BesovParams
from besovtrace.domain import build_domain
from besovtrace.kernels import _numpy

if numba_available():
    from besovtrace.kernels import _numba
else:
    _numba = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(h):
    dom = build_domain("halfplane", h)
    t = dom.boundary_t
    f = np.cos(2 * np.pi * t / 8) + 0.3 * np.sin(6 * np.pi * t / 8)
    D = np.ascontiguousarray(dom.boundary_distances)
    nu = dom.nu_weights
    lo, hi = level_range(dom, BesovParams(0.5))
    radii = np.ldexp(1.0, np.arange(lo, hi + 1))
    P = dom.space.points[dom.interior]
    u = np.sin(P[:, 0]) * np.exp(-P[:, 1])
    indptr, indices, dist = interior_neighbors(dom, 2 * h)
    return dom, {
        "ball_sums": lambda m: m.ball_sums(D, nu, f, 2.0, radii),
        "double_integral_rows": lambda m: m.double_integral_rows(D, nu, f, 2.0, 1.0),
        "local_lip": lambda m: m.local_lip(indptr, indices, dist, u),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--h", type=float, default=1 / 32)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    dom, work = cases(args.h)
    print(f"halfplane h={args.h}: {dom.boundary.size} boundary sites, {dom.interior.size} interior sites")
    print(f"{'kernel':24s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>9s}  max|diff|")
    for name, fn in work.items():
        t_np = best_of(lambda: fn(_numpy), args.repeat)
        if _numba is None:
            print(f"{name:24s} {1e3 * t_np:12.3f} {'n/a':>12s}")
            continue
        fn(_numba)  # compile
        t_nb = best_of(lambda: fn(_numba), args.repeat)
        a, b = fn(_numpy), fn(_numba)
        pairs = zip(a, b) if isinstance(a, tuple) else [(a, b)]
        diff = max(float(np.max(np.abs(x - y))) for x, y in pairs)
        print(f"{name:24s} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {t_np / t_nb:9.2f}  {diff:.2e}")


if __name__ == "__main__":
    main()
