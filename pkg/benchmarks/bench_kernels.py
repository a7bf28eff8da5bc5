"""Compiled kernels against the numpy fallback, plus end-to-end pair registration.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--pairs 5]

Kernel timings call both implementations directly on the workloads the
pipeline produces (256x256 grid, 400x361 sweep, B = 128 sphere). The
end-to-end rows re-run registration in a subprocess with
``FS2D_PURE_PYTHON=1`` so the whole pipeline uses the fallback.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from fs2d import _fallback
from fs2d.grid import GridConfig, cell_coordinates

try:
    from fs2d import _kernels
except ImportError:  # no compiler at install time
    _kernels = None

PAIR_SCRIPT = """
import json, sys, time
from fs2d import kernels
from fs2d.registration import register
from fs2d.scenarios import static_pair
trials = [static_pair(s) for s in range({pairs})]
register(trials[0].scan_a, trials[0].scan_b)
t0 = time.perf_counter()
for t in trials:
    register(t.scan_a, t.scan_b)
print(json.dumps({{"backend": kernels.BACKEND, "ms": 1e3 * (time.perf_counter() - t0) / len(trials)}}))
"""


def workloads(rng):
    cfg = GridConfig()
    x, y = cell_coordinates(cfg.grid_size, cfg.cell_size)
    az = 2 * np.pi * np.arange(400) / 400
    inten = rng.uniform(0, 1, (400, 361))
    phi, rho = np.mod(np.arctan2(y, x), 2 * np.pi), np.hypot(x, y)
    img = rng.uniform(0, 1, (256, 256))
    rows = rng.uniform(0, 255, (256, 256))
    cols = rng.uniform(0, 255, (256, 256))
    surface = rng.normal(size=(256, 256))
    n_pts = 20_000
    ai, ri, amp = rng.uniform(0, 400, n_pts), rng.uniform(0, 360, n_pts), rng.uniform(0, 1, n_pts)
    return {
        "polar_sample (256^2 from 400x361)": lambda m: m.polar_sample(inten, az, 0.25, phi, rho, 0.0),
        "bilinear_sample (256^2)": lambda m: m.bilinear_sample(img, rows, cols),
        "greedy_peaks (256^2, k=5)": lambda m: m.greedy_peaks(surface, 5, 3, 0.3, True),
        "splat_max (20k returns)": lambda m: m.splat_max(np.zeros((400, 361)), ai, ri, amp, 0.75, 1.0),
    }


def best_ms(fn, repeat: int) -> float:
    number = 3
    return 1e3 * min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def end_to_end(pairs: int, pure: bool) -> dict:
    env = dict(os.environ, FS2D_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", PAIR_SCRIPT.format(pairs=pairs)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    print(f"{'kernel':38s} {'cython ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, call in workloads(rng).items():
        py = best_ms(lambda: call(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:38s} {'n/a':>10s} {py:10.2f} {'n/a':>8s}")
            continue
        cy = best_ms(lambda: call(_kernels), args.repeat)
        print(f"{name:38s} {cy:10.2f} {py:10.2f} {py / cy:7.1f}x")

    print()
    print(f"pair registration, 256x256 grid, B = 128, mean of {args.pairs} pairs")
    for pure in (False, True):
        r = end_to_end(args.pairs, pure)
        print(f"  backend {r['backend']:7s} {r['ms']:8.1f} ms/pair")
    return 0


if __name__ == "__main__":
    sys.exit(main())
