"""Timing comparison of the compiled kernels against the numpy fallback.

Runs the hot paths twice in subprocesses, once per backend (the backend
is fixed at import time by FBDP_DISABLE_NUMBA), and prints a table of
wall-clock times and speedups.

Usage: python3 bench/benchmark.py [--n-paths 20000]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKLOAD = r"""
import json, time
from fbdp import USING_NUMBA
from fbdp.model import RateSchedule
from fbdp.paths import estimate_pmf
from fbdp.stable import RngStream, build_grid, sample_stable_batch

n_paths = {n_paths}
rates = RateSchedule.linear(0.5, 1.0)

def timed(fn, repeats=3):
    fn()  # warm-up (includes jit compilation when enabled)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best

results = {{"backend": "numba" if USING_NUMBA else "numpy"}}
results["stable_draws_1e6"] = timed(
    lambda: sample_stable_batch(0.7, 10**6, RngStream(1, 0)))
results["subordinator_grid"] = timed(
    lambda: build_grid(0.7, 1e-4, 50.0, RngStream(2, 0)))
results["renewal_pmf"] = timed(
    lambda: estimate_pmf("renewal", rates, 0.7, 1, 2.0, n_paths, 3))
results["timechange_pmf"] = timed(
    lambda: estimate_pmf("timechange", rates, 0.7, 1, 2.0, n_paths, 4))
print(json.dumps(results))
"""


def run_backend(disable, n_paths):
    env = dict(os.environ)
    env["FBDP_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run(
        [sys.executable, "-c", _WORKLOAD.format(n_paths=n_paths)],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-paths", type=int, default=20000)
    args = ap.parse_args()
    fast = run_backend(False, args.n_paths)
    slow = run_backend(True, args.n_paths)
    print(f"{'kernel':24s} {'numba [s]':>10s} {'numpy [s]':>10s} "
          f"{'speedup':>8s}")
    for key in fast:
        if key == "backend":
            continue
        ratio = slow[key] / fast[key]
        print(f"{key:24s} {fast[key]:10.4f} {slow[key]:10.4f} "
              f"{ratio:7.1f}x")


if __name__ == "__main__":
    main()
