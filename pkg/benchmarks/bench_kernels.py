"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per workload with the best-of-N time for each backend and
the speedup. Both backends are checked to agree before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from detcap import kernels

WORKLOADS = {
    # (replicates, groups, jmax): grouped means as used by uniform-injective at n = 10^4, r = 100
    "grouped_esm 1000x2 j<=100": (1000, 2, 100),
    "grouped_esm 1000x5 j<=50": (1000, 5, 50),
    # (schemes, r, replicates, n): scheme averages over a finite support
    "weighted_alpha_means 200x30 on 500x100": (200, 30, 500, 100),
    "weighted_alpha_means 1000x10 on 1000x50": (1000, 10, 1000, 50),
}


def make_inputs(name, shape, rng):
    if name.startswith("grouped_esm"):
        R, L, jmax = shape
        values = np.broadcast_to(rng.uniform(0.1, 0.9, L), (R, L))
        counts = rng.multinomial(5000, np.full(L, 1.0 / L), size=R)
        return (values, counts, jmax)
    S, r, R, n = shape
    schemes = rng.integers(0, n, (S, r))
    weights = np.full(S, 1.0 / S)
    q = rng.uniform(0.1, 0.9, (R, n))
    return (schemes, weights, q)


def best_time(fn, args, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args, backend=backend)
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"available backends: {', '.join(backends)}")
    rng = np.random.default_rng(0)
    for name, shape in WORKLOADS.items():
        fn = kernels.grouped_esm if name.startswith("grouped_esm") else kernels.weighted_alpha_means
        inputs = make_inputs(name, shape, rng)
        results = [fn(*inputs, backend=b) for b in backends]
        if len(results) == 2:
            a, b = (np.asarray(x[0] if isinstance(x, tuple) else x) for x in results)
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-14)
        times = {b: best_time(fn, inputs, b, args.repeat) for b in backends}
        line = "  ".join(f"{b}={t * 1e3:8.2f} ms" for b, t in times.items())
        if "compiled" in times and "fallback" in times:
            line += f"  speedup x{times['fallback'] / times['compiled']:.1f}"
        print(f"{name:42s} {line}")


if __name__ == "__main__":
    main()
