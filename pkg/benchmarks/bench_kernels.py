"""Compare the compiled and numpy backends on the Monte Carlo and Bessel kernels.

Run with ``python3 benchmarks/bench_kernels.py [--paths N] [--steps K]``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lfe_lab import kernels


def _time(fn, repeat: int = 3) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--n", type=int, default=8)
    args = ap.parse_args()

    try:
        kernels.backend_module("compiled")
        backends = ["compiled", "python"]
    except ImportError:
        backends = ["python"]
        print("compiled backend unavailable; timing numpy fallback only")

    n, h = args.n, 1e-3
    snaps = np.array([args.steps])
    M = np.eye(3)[None] * (1 - 2 * h)
    S = np.eye(3)[None] * np.sqrt(2 * h)
    ys = np.linspace(0.0, 40.0, 200)

    results = {}
    for b in backends:
        mod = kernels.backend_module(b)
        results[b] = {
            "cycle": _time(lambda: kernels.propagate_cycle(1 - 2 * h, -0.5 * h, np.sqrt(2 * h), 1.0, n, 1, args.paths, 0, args.steps, snaps, backend=b)),
            "dense": _time(lambda: kernels.propagate_dense(M, S, np.eye(3), 1, args.paths, 0, args.steps, snaps, backend=b)),
            "bessel": _time(lambda: [mod.bessel_ie012_series(float(y)) if y <= 15 else mod.bessel_ie012_quad(float(y)) for y in ys]),
        }

    print(f"paths={args.paths} steps={args.steps} n={n}")
    print(f"{'kernel':<8}" + "".join(f"{b:>12}" for b in backends) + ("    speedup" if len(backends) == 2 else ""))
    for k in ("cycle", "dense", "bessel"):
        row = f"{k:<8}" + "".join(f"{results[b][k]:>11.4f}s" for b in backends)
        if len(backends) == 2:
            row += f"{results['python'][k] / results['compiled'][k]:>10.1f}x"
        print(row)

    if len(backends) == 2:
        a = kernels.propagate_cycle(0.99, 0.01, 0.1, 1.0, n, 5, 1000, 0, 50, np.array([50]), backend="compiled")
        b = kernels.propagate_cycle(0.99, 0.01, 0.1, 1.0, n, 5, 1000, 0, 50, np.array([50]), backend="python")
        print(f"max backend difference on a shared run: {np.max(np.abs(a - b)):.2e}")


if __name__ == "__main__":
    main()
