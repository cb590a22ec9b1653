"""Compare the compiled and pure-Python optimizer kernels.

Usage: python3 benchmarks/bench_kernels.py [--profiles N] [--repeat R]
"""
import argparse
import statistics
import time

import numpy as np

from dvfsched import TaskProfile
from dvfsched import _kernels_py
from dvfsched.model import WIDE
from dvfsched.optimizer import N_SCAN, TOL

try:
    from dvfsched import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def make_profiles(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        p_star = rng.uniform(175, 206)
        k = rng.integers(10, 51)
        t0 = rng.uniform(0.1, 0.95) * k
        out.append(TaskProfile(f"b{i}", rng.uniform(0.2, 0.41) * p_star, rng.uniform(0.1, 0.2) * p_star,
                               p_star, t0, t0 + rng.uniform(1.66, 7.61) * k, rng.uniform(0.07, 0.91)))
    return out


def workload(mod, profiles):
    d = WIDE
    ca, cb, cc = d.curve.offset, d.curve.divisor, d.curve.shift
    fc_max = d.fc_max
    for p in profiles:
        mod.solve_unconstrained(p.p0, p.gamma, p.c, p.d_work, p.delta, p.t0, ca, cb, cc,
                                d.vc_floor, d.vc_max, d.fm_min, d.fm_max, N_SCAN, TOL)
        t_min = p.t0 + p.d_work * (p.delta / fc_max + (1 - p.delta) / d.fm_max)
        budget = 1.1 * t_min
        room = budget - p.t0 - p.d_work * p.delta / fc_max
        lo = max(d.fm_min, p.d_work * (1 - p.delta) / room)
        mod.solve_budget(budget, p.p0, p.gamma, p.c, p.d_work, p.delta, p.t0, ca, cb, cc,
                         d.vc_floor, d.vc_max, lo, d.fm_max, N_SCAN, TOL)


def bench(mod, profiles, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        workload(mod, profiles)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profiles", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    profiles = make_profiles(args.profiles)
    t_py = bench(_kernels_py, profiles, args.repeat)
    per = 1e6 * t_py / args.profiles
    print(f"python : {t_py:8.4f} s  ({per:7.1f} us/profile, unconstrained + deadline solve)")
    if _kernels_cy is None:
        print("cython : not built (pip install -e . --no-build-isolation)")
        return
    t_cy = bench(_kernels_cy, profiles, args.repeat)
    print(f"cython : {t_cy:8.4f} s  ({1e6 * t_cy / args.profiles:7.1f} us/profile)")
    print(f"speedup: {t_py / t_cy:6.1f}x")


if __name__ == "__main__":
    main()
