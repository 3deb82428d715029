"""Finite probability vectors, base-2 KL divergence and the shifted-binomial source."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

SUM_TOL = 1e-9


class DimensionMismatchError(ValueError):
    pass


class AbsoluteContinuityError(ValueError):
    """Raised when p(x) > 0 but q(x) = 0, so D(p||q) is unbounded."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    """A probability vector over letters ``0..len-1``.

    Values are validated once and then used as given; nothing is renormalized.
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.probs)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("probs must be a non-empty 1-d vector")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("probabilities must be finite and non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "probs", arr)

    def __len__(self) -> int:
        return self.probs.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def tolist(self) -> list[float]:
        return self.probs.tolist()


@dataclass(frozen=True)
class HypothesisPair:
    """Null (``p0``) and alternative (``p1``) source distributions.

    Both must be strictly positive on every letter and share an alphabet of
    at least two letters.
    """

    p0: Distribution
    p1: Distribution

    def __post_init__(self):
        for name in ("p0", "p1"):
            value = getattr(self, name)
            if not isinstance(value, Distribution):
                object.__setattr__(self, name, Distribution(value))
        if len(self.p0) != len(self.p1):
            raise DimensionMismatchError(
                f"alphabet sizes differ: {len(self.p0)} vs {len(self.p1)}"
            )
        if len(self.p0) < 2:
            raise ValueError("source alphabet needs at least two letters")
        if np.any(self.p0.probs <= 0) or np.any(self.p1.probs <= 0):
            raise ValueError("both hypotheses must give every letter positive probability")

    @property
    def alphabet_size(self) -> int:
        return len(self.p0)

    def source_kl(self) -> float:
        return kl_divergence(self.p0, self.p1)

    def to_dict(self) -> dict:
        return {"p0": self.p0.tolist(), "p1": self.p1.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> HypothesisPair:
        try:
            p0, p1 = data["p0"], data["p1"]
        except (KeyError, TypeError) as exc:
            raise ValueError("distribution pair needs keys 'p0' and 'p1'") from exc
        if len(p0) != len(p1):
            raise DimensionMismatchError("'p0' and 'p1' must have equal length")
        return cls(Distribution(p0), Distribution(p1))


def load_pair(path: str | Path) -> HypothesisPair:
    """Read a ``{"p0": [...], "p1": [...]}`` JSON file."""
    with open(path) as fh:
        return HypothesisPair.from_dict(json.load(fh))


@dataclass(frozen=True)
class BinomialSpec:
    alphabet_size: int
    s: float

    def __post_init__(self):
        if int(self.alphabet_size) != self.alphabet_size or self.alphabet_size < 2:
            raise ValueError("alphabet_size must be an integer >= 2")
        if not 0.0 < self.s < 1.0:
            raise ValueError("s must lie strictly between 0 and 1")


def _as_probs(d) -> np.ndarray:
    return d.probs if isinstance(d, Distribution) else np.asarray(d, dtype=float)


def kl_divergence(p, q) -> float:
    """D(p||q) in bits, with 0 log(0/q) = 0."""
    p, q = _as_probs(p), _as_probs(q)
    if p.shape != q.shape:
        raise DimensionMismatchError(f"shapes differ: {p.shape} vs {q.shape}")
    support = p > 0
    if np.any(q[support] <= 0):
        raise AbsoluteContinuityError("p is not absolutely continuous w.r.t. q")
    ps, qs = p[support], q[support]
    return max(float(np.sum(ps * np.log2(ps / qs))), 0.0)


def binomial_source(spec: BinomialSpec) -> Distribution:
    """Binomial(alphabet_size - 1, s) shifted onto letters ``0..alphabet_size-1``."""
    k = np.arange(spec.alphabet_size)
    return Distribution(stats.binom.pmf(k, spec.alphabet_size - 1, spec.s))


def binomial_pair(alphabet_size: int, s0: float, s1: float) -> HypothesisPair:
    return HypothesisPair(
        binomial_source(BinomialSpec(alphabet_size, s0)),
        binomial_source(BinomialSpec(alphabet_size, s1)),
    )
