#!/usr/bin/env python3
"""Benchmark: compiled evaluation kernel vs the numpy fallback.

Builds compactly supported networks of growing term count and times
batch evaluation over a dense grid, which is the workload that
dominates the error oracles and norm sweeps.  Also cross-checks that
the two backends agree.

Run:  python benchmarks/bench_eval.py
"""

from __future__ import annotations

import time

import numpy as np

from kram import _eval_fallback
from kram.network import KReluNetwork, KReluTerm

try:
    from kram import _evalcore

    COMPILED = _evalcore
except ImportError:
    COMPILED = None


def build_network(k: int, terms: int, rng) -> KReluNetwork:
    return KReluNetwork(
        k,
        [
            KReluTerm(c, 1 if o < 0.5 else -1, t, k)
            for c, o, t in zip(
                rng.uniform(-2.0, 2.0, terms),
                rng.uniform(0.0, 1.0, terms),
                rng.uniform(-1.5, 1.5, terms),
            )
        ],
        keep_zeros=True,
    )


def time_backend(impl, xs, coeffs, signs, knots, k, repeats=5) -> float:
    out = np.empty_like(xs)
    impl.eval_batch(xs, coeffs, signs, knots, k, out)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        impl.eval_batch(xs, coeffs, signs, knots, k, out)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    rng = np.random.default_rng(0)
    xs = np.sort(rng.uniform(-1.5, 1.5, 1 << 17))
    print(f"{'k':>2} {'terms':>6} {'python':>10} {'compiled':>10} {'speedup':>8}  max|diff|")
    for k, count in ((2, 97), (2, 385), (3, 1025), (4, 2561)):
        net = build_network(k, count, rng)
        coeffs, signs, knots = net._float_data
        t_py = time_backend(_eval_fallback, xs, coeffs, signs, knots, k)
        row = f"{k:>2} {len(net.terms):>6} {t_py * 1e3:>8.1f}ms"
        if COMPILED is None:
            print(row + "   (compiled kernel not built)")
            continue
        t_c = time_backend(COMPILED, xs, coeffs, signs, knots, k)
        out_py = np.empty_like(xs)
        out_c = np.empty_like(xs)
        _eval_fallback.eval_batch(xs, coeffs, signs, knots, k, out_py)
        COMPILED.eval_batch(xs, coeffs, signs, knots, k, out_c)
        diff = float(np.max(np.abs(out_py - out_c)))
        print(row + f" {t_c * 1e3:>8.1f}ms {t_py / t_c:>7.1f}x  {diff:.2e}")


if __name__ == "__main__":
    main()
