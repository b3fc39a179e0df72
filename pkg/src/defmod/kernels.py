"""Hot numeric kernels behind the metric suite.

Two implementations exist for each kernel: a numba ``@njit`` version and a
pure-numpy one.  The jitted path is used when numba imports cleanly;
setting the environment variable ``DEFMOD_NUMBA=0`` before import forces
the numpy path (useful for debugging and for the benchmark in
``benchmarks/bench_kernels.py``).

Kernels:

* ``lcs_length(a, b)`` -- longest common subsequence length over int64
  token-id arrays (the ROUGE-L inner loop, O(len(a) * len(b))).
* ``greedy_best_sims(cand, ref, cand_ids, ref_ids)`` -- for each candidate
  row, the best cosine similarity against any reference row, with exact
  1.0 for identical token ids and results clamped to [0, 1].  Rows must be
  unit-normalized.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("DEFMOD_NUMBA", "1").strip().lower()
_WANT_NUMBA = _env not in ("0", "false", "no", "off")

if _WANT_NUMBA:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False


def lcs_length_numpy(a: np.ndarray, b: np.ndarray) -> int:
    """Row-sweep LCS: dp[i][j] = running max of max(dp[i-1][j], dp[i-1][j-1] + eq)."""
    if a.size == 0 or b.size == 0:
        return 0
    prev = np.zeros(b.size + 1, dtype=np.int64)
    for tok in a:
        row = np.maximum(prev[1:], prev[:-1] + (b == tok))
        np.maximum.accumulate(row, out=row)
        nxt = np.empty_like(prev)
        nxt[0] = 0
        nxt[1:] = row
        prev = nxt
    return int(prev[-1])


def greedy_best_sims_numpy(
    cand: np.ndarray, ref: np.ndarray, cand_ids: np.ndarray, ref_ids: np.ndarray
) -> np.ndarray:
    sims = cand @ ref.T
    same = cand_ids[:, None] == ref_ids[None, :]
    np.copyto(sims, 1.0, where=same)
    return np.clip(sims.max(axis=1), 0.0, 1.0)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _lcs_length_jit(a: np.ndarray, b: np.ndarray) -> int:
        m = b.size
        prev = np.zeros(m + 1, dtype=np.int64)
        cur = np.zeros(m + 1, dtype=np.int64)
        for i in range(a.size):
            ai = a[i]
            for j in range(1, m + 1):
                if b[j - 1] == ai:
                    cur[j] = prev[j - 1] + 1
                elif prev[j] >= cur[j - 1]:
                    cur[j] = prev[j]
                else:
                    cur[j] = cur[j - 1]
            prev, cur = cur, prev
        return int(prev[m])

    @njit(cache=True)
    def _greedy_best_sims_jit(
        cand: np.ndarray, ref: np.ndarray, cand_ids: np.ndarray, ref_ids: np.ndarray
    ) -> np.ndarray:
        n, dim = cand.shape
        r = ref.shape[0]
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            best = 0.0
            for j in range(r):
                if cand_ids[i] == ref_ids[j]:
                    best = 1.0
                    break
                s = 0.0
                for k in range(dim):
                    s += cand[i, k] * ref[j, k]
                if s > best:
                    best = s
            out[i] = 1.0 if best > 1.0 else best
        return out

    def lcs_length_numba(a: np.ndarray, b: np.ndarray) -> int:
        if a.size == 0 or b.size == 0:
            return 0
        return _lcs_length_jit(a, b)

    greedy_best_sims_numba = _greedy_best_sims_jit
    lcs_length = lcs_length_numba
    greedy_best_sims = _greedy_best_sims_jit
    BACKEND = "numba"
else:
    lcs_length_numba = None
    greedy_best_sims_numba = None
    lcs_length = lcs_length_numpy
    greedy_best_sims = greedy_best_sims_numpy
    BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND
