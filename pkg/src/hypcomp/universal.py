"""Task-unaware baseline built from the capped "equidistant" distribution Q*.

Q* minimises max(D(P0||Q), D(P1||Q)) over distributions with Q(x) <= 1/M.
For a fixed weight lam the minimiser of lam*D(P0||Q) + (1-lam)*D(P1||Q)
under the cap is the mixture lam*P0 + (1-lam)*P1 scaled up and clipped at
1/M (clip-and-redistribute). The weight is then bisected until the two
divergences agree; the gap D0 - D1 is non-increasing in lam.
"""

from __future__ import annotations

import numpy as np

from .compressor import Compressor
from .prob import Distribution, HypothesisPair, kl_divergence


class ConvergenceError(RuntimeError):
    pass


def capped_projection(m: np.ndarray, cap: float, max_iter: int = 10_000) -> np.ndarray:
    """Return min(cap, c*m) with c chosen so the result sums to one."""
    if cap * m.size < 1.0 - 1e-12:
        raise ValueError(f"cap {cap} infeasible for {m.size} letters")
    clipped = np.zeros(m.size, dtype=bool)
    for _ in range(max_iter):
        free = ~clipped
        if not free.any():
            return np.full(m.size, 1.0 / m.size)
        scale = (1.0 - cap * clipped.sum()) / m[free].sum()
        over = free & (scale * m > cap)
        if not over.any():
            q = np.where(clipped, cap, scale * m)
            return q / q.sum()
        clipped |= over
    raise ConvergenceError("clip-and-redistribute did not settle")


def solve_q_star(h: HypothesisPair, M: int, tol: float = 1e-9, max_iter: int = 10_000):
    """Return ``(Q*, delta)`` for rate M (requires 2 <= M <= |X|)."""
    n = h.alphabet_size
    if not 2 <= M <= n:
        raise ValueError(f"M must be in [2, {n}], got {M}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    p0, p1 = h.p0.probs, h.p1.probs
    cap = 1.0 / M

    def at(lam):
        q = capped_projection(lam * p0 + (1.0 - lam) * p1, cap)
        return q, kl_divergence(p0, q), kl_divergence(p1, q)

    q, d0, d1 = at(0.0)
    if d0 <= d1:
        return Distribution(q), max(d0, d1)
    q, d0, d1 = at(1.0)
    if d0 >= d1:
        return Distribution(q), max(d0, d1)

    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        q, d0, d1 = at(mid)
        if abs(d0 - d1) <= tol or hi - lo <= 1e-15:
            return Distribution(q), max(d0, d1)
        if d0 > d1:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"bisection on the mixture weight did not converge in {max_iter} steps")


def universal_compress(h: HypothesisPair, M: int) -> Compressor:
    """Keep the M-1 letters with largest Q* as singletons; pool everything else.

    Ties in Q* go to the smaller letter index.
    """
    n = h.alphabet_size
    if not 2 <= M <= n:
        raise ValueError(f"M must be in [2, {n}], got {M}")
    q, _ = solve_q_star(h, M)
    order = sorted(range(n), key=lambda x: (-q.probs[x], x))
    head = [(x,) for x in order[: M - 1]]
    return Compressor(tuple(head) + (tuple(order[M - 1:]),), n)
