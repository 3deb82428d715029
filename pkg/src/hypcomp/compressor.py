"""Scalar compressors as partitions of the source alphabet, and their penalties.

Letters and compressed symbols are 0-based throughout the Python API. The JSON
form uses 1-based letters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .prob import DimensionMismatchError, Distribution, HypothesisPair, kl_divergence


def _canonical(groups) -> tuple[tuple[int, ...], ...]:
    groups = [tuple(sorted(int(x) for x in g)) for g in groups]
    return tuple(sorted(groups, key=lambda g: g[0] if g else -1))


@dataclass(frozen=True)
class Compressor:
    """A surjective map f: X -> {0..M-1} stored as its preimage groups.

    Groups are kept in canonical order: letters ascending inside a group and
    groups ordered by their smallest letter. Symbol ``i`` is ``groups[i]``.
    """

    groups: tuple[tuple[int, ...], ...]
    source_size: int

    def __post_init__(self):
        groups = _canonical(self.groups)
        object.__setattr__(self, "groups", groups)
        if any(len(g) == 0 for g in groups):
            raise ValueError("groups must be non-empty")
        letters = [x for g in groups for x in g]
        if sorted(letters) != list(range(self.source_size)):
            raise ValueError(
                f"groups must partition 0..{self.source_size - 1} exactly once each"
            )

    @classmethod
    def identity(cls, n: int) -> Compressor:
        return cls(tuple((x,) for x in range(n)), n)

    @classmethod
    def single(cls, n: int) -> Compressor:
        return cls((tuple(range(n)),), n)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> Compressor:
        """Build from any labelling ``labels[x] = block id`` (ids need not be canonical)."""
        blocks: dict[int, list[int]] = {}
        for x, lab in enumerate(labels):
            blocks.setdefault(int(lab), []).append(x)
        return cls(tuple(tuple(b) for b in blocks.values()), len(labels))

    @property
    def rate_symbols(self) -> int:
        return len(self.groups)

    @property
    def rate_bits(self) -> float:
        return float(np.log2(self.rate_symbols))

    @property
    def labels(self) -> np.ndarray:
        """Array mapping each source letter to its compressed symbol."""
        out = np.empty(self.source_size, dtype=np.intp)
        for i, g in enumerate(self.groups):
            out[list(g)] = i
        return out

    def merge(self, a: int, b: int) -> Compressor:
        """Return the compressor with groups ``a`` and ``b`` combined."""
        m = self.rate_symbols
        if a == b or not (0 <= a < m and 0 <= b < m):
            raise IndexError(f"need two distinct group indices in [0, {m}), got {a}, {b}")
        rest = [g for i, g in enumerate(self.groups) if i not in (a, b)]
        return Compressor(tuple(rest) + (self.groups[a] + self.groups[b],), self.source_size)

    def refines(self, other: Compressor) -> bool:
        """True when every group of ``self`` lies inside a group of ``other``."""
        if other.source_size != self.source_size:
            return False
        lab = other.labels
        return all(len({lab[x] for x in g}) == 1 for g in self.groups)

    def to_dict(self) -> dict:
        return {
            "groups": [[x + 1 for x in g] for g in self.groups],
            "source_size": self.source_size,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Compressor:
        return cls(
            tuple(tuple(x - 1 for x in g) for g in data["groups"]),
            int(data["source_size"]),
        )


def _check_size(c: Compressor, n: int):
    if c.source_size != n:
        raise DimensionMismatchError(
            f"compressor expects {c.source_size} letters, distribution has {n}"
        )


def induced_distribution(c: Compressor, p: Distribution) -> Distribution:
    """Push ``p`` through ``c``: mass of each compressed symbol."""
    probs = p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)
    _check_size(c, probs.size)
    return Distribution(np.bincount(c.labels, weights=probs, minlength=c.rate_symbols))


def group_posterior(h: HypothesisPair, c: Compressor, group_index: int, theta: int) -> Distribution:
    """P_theta(x | symbol), restricted to the letters of ``c.groups[group_index]``."""
    if theta not in (0, 1):
        raise ValueError("theta must be 0 or 1")
    _check_size(c, h.alphabet_size)
    if not 0 <= group_index < c.rate_symbols:
        raise IndexError(f"group index {group_index} out of range")
    p = (h.p0 if theta == 0 else h.p1).probs
    mass = p[list(c.groups[group_index])]
    return Distribution(mass / mass.sum())


def penalty_direct(h: HypothesisPair, c: Compressor) -> float:
    """Exponent lost to compression: D(P0||P1) - D(P0hat||P1hat), in bits."""
    _check_size(c, h.alphabet_size)
    return h.source_kl() - kl_divergence(
        induced_distribution(c, h.p0), induced_distribution(c, h.p1)
    )


def penalty_grouped(h: HypothesisPair, c: Compressor) -> float:
    """Same penalty written as the P0hat-weighted KL between group posteriors."""
    _check_size(c, h.alphabet_size)
    p0_hat = induced_distribution(c, h.p0).probs
    total = 0.0
    for i, g in enumerate(c.groups):
        if len(g) == 1:
            continue
        total += p0_hat[i] * kl_divergence(
            group_posterior(h, c, i, 0), group_posterior(h, c, i, 1)
        )
    return total


def _plogr(a, b):
    return a * np.log2(a / b)


def merge_cost(h: HypothesisPair, c: Compressor, a: int, b: int) -> float:
    """Penalty increase caused by merging groups ``a`` and ``b`` of ``c``."""
    m = c.rate_symbols
    if a == b or not (0 <= a < m and 0 <= b < m):
        raise IndexError(f"need two distinct group indices in [0, {m}), got {a}, {b}")
    q0 = induced_distribution(c, h.p0).probs
    q1 = induced_distribution(c, h.p1).probs
    cost = (
        _plogr(q0[a], q1[a]) + _plogr(q0[b], q1[b])
        - _plogr(q0[a] + q0[b], q1[a] + q1[b])
    )
    return max(float(cost), 0.0)


def greedy_compress(h: HypothesisPair, M: int) -> Compressor:
    """KL-greedy design: repeatedly merge the pair of groups with least merge cost.

    Exact ties go to the pair whose smallest letters are lexicographically
    least. Since groups stay ordered by smallest letter, that is the first
    minimum in row-major order over the upper triangle.
    """
    n = h.alphabet_size
    if not 1 <= M <= n:
        raise ValueError(f"M must be in [1, {n}], got {M}")
    groups = [[x] for x in range(n)]
    q0 = h.p0.probs.copy()
    q1 = h.p1.probs.copy()
    own = _plogr(q0, q1)
    while len(groups) > M:
        k = len(groups)
        s0 = q0[:, None] + q0[None, :]
        s1 = q1[:, None] + q1[None, :]
        cost = own[:, None] + own[None, :] - _plogr(s0, s1)
        cost[np.tril_indices(k)] = np.inf
        a, b = np.unravel_index(np.argmin(cost), cost.shape)
        groups[a].extend(groups[b])
        del groups[b]
        q0[a] += q0[b]
        q1[a] += q1[b]
        q0 = np.delete(q0, b)
        q1 = np.delete(q1, b)
        own = np.delete(own, b)
        own[a] = _plogr(q0[a], q1[a])
    return Compressor(tuple(tuple(g) for g in groups), n)


@dataclass(frozen=True)
class DesignReport:
    compressor: Compressor
    p0_hat: Distribution
    p1_hat: Distribution
    exponent_bits: float
    penalty_bits: float
    source_kl_bits: float

    def to_dict(self) -> dict:
        g = lambda v: float(f"{v:.12g}")
        return {
            "compressor": self.compressor.to_dict(),
            "p0_hat": [g(v) for v in self.p0_hat.probs],
            "p1_hat": [g(v) for v in self.p1_hat.probs],
            "exponent_bits": g(self.exponent_bits),
            "penalty_bits": g(self.penalty_bits),
            "source_kl_bits": g(self.source_kl_bits),
        }


def design_report(h: HypothesisPair, c: Compressor) -> DesignReport:
    p0_hat = induced_distribution(c, h.p0)
    p1_hat = induced_distribution(c, h.p1)
    source = h.source_kl()
    exponent = min(kl_divergence(p0_hat, p1_hat), source)
    return DesignReport(c, p0_hat, p1_hat, exponent, source - exponent, source)
