"""Exhaustive optimum over all partitions into exactly M blocks.

Partitions are enumerated as restricted growth strings (RGS) in lexicographic
order. Small prefix subtrees are expanded in bulk with numpy and scored in one
shot, so the |X|=13 case stays within seconds per rate.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .compressor import Compressor
from .prob import HypothesisPair

DEFAULT_BUDGET = 10**8
CHUNK_ROWS = 1 << 18


class BudgetExceededError(RuntimeError):
    def __init__(self, n: int, M: int, count: int, budget: int):
        self.n, self.M, self.count, self.budget = n, M, count, budget
        super().__init__(
            f"S({n},{M}) = {count} partitions exceeds the budget of {budget}; "
            "use greedy_compress instead"
        )


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Number of partitions of an n-set into exactly k non-empty blocks."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


@lru_cache(maxsize=None)
def _completions(remaining: int, used: int, M: int) -> int:
    # RGS suffixes of length `remaining` that end with exactly M blocks
    if used > M:
        return 0
    if remaining == 0:
        return int(used == M)
    return used * _completions(remaining - 1, used, M) + _completions(remaining - 1, used + 1, M)


def _expand(prefix: list[int], used: int, n: int, M: int) -> np.ndarray:
    """All RGS of length n with exactly M blocks extending ``prefix``, lexicographic."""
    rows = np.array([prefix], dtype=np.int8)
    top = np.array([used], dtype=np.int8)
    for pos in range(len(prefix), n):
        remaining = n - pos - 1
        new_rows, new_top = [], []
        for v in range(M):
            # v < top reuses a block, v == top opens one
            ok = (v <= top) & (np.maximum(top, v + 1) + remaining >= M)
            if not ok.any():
                continue
            sel = rows[ok]
            new_rows.append(np.column_stack([sel, np.full(len(sel), v, dtype=np.int8)]))
            new_top.append(np.maximum(top[ok], v + 1).astype(np.int8))
        rows = np.concatenate(new_rows)
        top = np.concatenate(new_top)
        order = np.lexsort(rows.T[::-1])
        rows, top = rows[order], top[order]
    return rows


def iter_rgs_chunks(n: int, M: int, chunk_rows: int = CHUNK_ROWS):
    """Yield (rows, n) int8 arrays covering every M-block RGS exactly once, in lex order."""
    if not 1 <= M <= n:
        return

    def walk(prefix, used):
        remaining = n - len(prefix)
        if _completions(remaining, used, M) <= chunk_rows:
            if _completions(remaining, used, M):
                yield _expand(prefix, used, n, M)
            return
        for v in range(min(used + 1, M)):
            yield from walk(prefix + [v], max(used, v + 1))

    yield from walk([0], 1)


def _exponents(rows: np.ndarray, p0: np.ndarray, p1: np.ndarray, M: int) -> np.ndarray:
    """D(P0hat||P1hat) in bits for each labelling row."""
    out = np.zeros(len(rows))
    for j in range(M):
        mask = rows == j
        a = mask @ p0
        b = mask @ p1
        out += a * np.log2(a / b)
    return out


def optimal_compress(h: HypothesisPair, M: int, budget: int | None = DEFAULT_BUDGET) -> Compressor:
    """Minimum-penalty compressor with exactly M groups, by exhaustive search.

    Among exactly tied partitions the lexicographically smallest RGS wins,
    so the answer does not depend on chunking.
    """
    n = h.alphabet_size
    if not 1 <= M <= n:
        raise ValueError(f"M must be in [1, {n}], got {M}")
    count = stirling2(n, M)
    if budget is not None and count > budget:
        raise BudgetExceededError(n, M, count, budget)
    p0, p1 = h.p0.probs, h.p1.probs
    best_val, best_row = -np.inf, None
    for rows in iter_rgs_chunks(n, M):
        vals = _exponents(rows, p0, p1, M)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_row = vals[i], rows[i]
    return Compressor.from_labels(best_row.tolist())
