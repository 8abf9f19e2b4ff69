#!/usr/bin/env python3
"""Compare the compiled and pure-numpy kernel backends.

Times the four hot kernels on a service-sized frame (640x480) and a
full camera frame (3856x2490), reporting the median of --repeats runs
and the speedup of the compiled extension over the fallback.

Run from the repository root after an editable install:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --repeats 9 --full-frame
"""

import argparse
import statistics
import time

import numpy as np

from trapsight import _kernels_py

try:
    from trapsight import _kernels
except ImportError:
    _kernels = None


def _median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def _workload(shape, rng):
    gray = rng.integers(0, 256, shape, dtype=np.uint8)
    other = rng.integers(0, 256, shape, dtype=np.uint8)
    # speckled mask at roughly weevil-like density: many small components
    mask = np.where(rng.random(shape) < 0.35, 255, 0).astype(np.uint8)
    return [
        ("threshold_u8", lambda impl: impl.threshold_u8(gray, 60)),
        ("absdiff_u8", lambda impl: impl.absdiff_u8(gray, other)),
        ("equal_count", lambda impl: impl.equal_count(gray, other)),
        ("label_stats", lambda impl: impl.label_stats(mask)),
    ]


def run(shape, repeats: int) -> None:
    rng = np.random.default_rng(0)
    h, w = shape
    print(f"\n{w}x{h} frame, median of {repeats} runs")
    print(f"{'kernel':<14} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, call in _workload(shape, rng):
        py = _median_time(lambda: call(_kernels_py), repeats)
        if _kernels is None:
            print(f"{name:<14} {py * 1e3:9.2f}ms {'n/a':>10} {'n/a':>8}")
            continue
        cy = _median_time(lambda: call(_kernels), repeats)
        print(
            f"{name:<14} {py * 1e3:9.2f}ms {cy * 1e3:9.2f}ms "
            f"{py / cy:7.1f}x"
        )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument(
        "--full-frame",
        action="store_true",
        help="also time the full 3856x2490 camera resolution",
    )
    args = parser.parse_args()

    if _kernels is None:
        print("compiled backend not importable; timing the fallback only")

    run((480, 640), args.repeats)
    if args.full_frame:
        run((2490, 3856), args.repeats)


if __name__ == "__main__":
    main()
