#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run from the repo root:

    python benchmarks/bench_kernels.py

The numba path is only timed when numba imported cleanly and
DEFMOD_NUMBA is not disabling it (the module picks a backend at import,
but both implementations stay importable for comparison).
"""

import time

import numpy as np

from defmod import kernels


def _time(fn, args_list, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_lcs(pairs=200, length=300, vocab=50, seed=0):
    rng = np.random.default_rng(seed)
    cases = [
        (
            rng.integers(0, vocab, size=length).astype(np.int64),
            rng.integers(0, vocab, size=length).astype(np.int64),
        )
        for _ in range(pairs)
    ]
    rows = [("lcs_length/numpy", _time(kernels.lcs_length_numpy, cases))]
    if kernels.lcs_length_numba is not None:
        kernels.lcs_length_numba(*cases[0])  # warm up the JIT
        rows.append(("lcs_length/numba", _time(kernels.lcs_length_numba, cases)))
        for a, b in cases[:20]:
            assert kernels.lcs_length_numba(a, b) == kernels.lcs_length_numpy(a, b)
    return rows


def bench_greedy(pairs=300, tokens=60, dim=64, seed=0):
    rng = np.random.default_rng(seed)

    def unit(n):
        v = rng.normal(size=(n, dim))
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    cases = []
    for _ in range(pairs):
        cids = rng.integers(0, 500, size=tokens).astype(np.int64)
        rids = rng.integers(0, 500, size=tokens).astype(np.int64)
        cases.append((unit(tokens), unit(tokens), cids, rids))
    rows = [("greedy_sims/numpy", _time(kernels.greedy_best_sims_numpy, cases))]
    if kernels.greedy_best_sims_numba is not None:
        kernels.greedy_best_sims_numba(*cases[0])
        rows.append(("greedy_sims/numba", _time(kernels.greedy_best_sims_numba, cases)))
        for case in cases[:20]:
            a = kernels.greedy_best_sims_numba(*case)
            b = kernels.greedy_best_sims_numpy(*case)
            assert np.allclose(a, b, atol=1e-12)
    return rows


def main():
    print(f"active backend: {kernels.backend_name()}")
    print(f"{'kernel':<22} {'seconds':>10}")
    for rows in (bench_lcs(), bench_greedy()):
        base = rows[0][1]
        for name, secs in rows:
            speedup = f"  ({base / secs:.1f}x vs numpy)" if name.endswith("numba") else ""
            print(f"{name:<22} {secs:>10.4f}{speedup}")


if __name__ == "__main__":
    main()
