"""Neyman-Pearson testing on compressed symbols and its Monte Carlo evaluation.

Blocks are generated in fixed-size chunks. Chunk ``k`` under hypothesis
``theta`` draws from its own Philox stream keyed by ``(seed, theta, k)``, so
results do not depend on how many workers process the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .compressor import Compressor, induced_distribution
from .prob import Distribution, HypothesisPair, kl_divergence

CHUNK_BLOCKS = 1 << 15
# statistics are snapped to this many decimals so that blocks with equal
# likelihood ratio compare equal regardless of summation order
STAT_DECIMALS = 9
DEFAULT_TRIALS = 10**6


@dataclass(frozen=True)
class TestConfig:
    blocklength: int = 5
    epsilon: float = 0.05
    trials_per_hypothesis: int = DEFAULT_TRIALS
    seed: int = 0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.blocklength < 1:
            raise ValueError("blocklength must be >= 1")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        if self.trials_per_hypothesis < 1:
            raise ValueError("trials_per_hypothesis must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TestResult:
    threshold_log_t: float
    type1_rate: float
    type2_rate: float
    type2_exponent_bits: float | None
    exact_zero: bool
    trials: int
    seed: int
    type2_stderr: float = 0.0

    __test__ = False

    @property
    def type2_exponent_estimate(self) -> float | None:
        return self.type2_exponent_bits

    def to_dict(self) -> dict:
        return asdict(self)


def block_rng(seed: int, theta: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(theta, chunk))
    return np.random.Generator(np.random.Philox(ss))


def _chunks(trials: int):
    for k, start in enumerate(range(0, trials, CHUNK_BLOCKS)):
        yield k, min(CHUNK_BLOCKS, trials - start)


def llr_table(p0_hat: Distribution, p1_hat: Distribution) -> np.ndarray:
    a, b = np.asarray(p0_hat.probs), np.asarray(p1_hat.probs)
    with np.errstate(divide="ignore"):
        return np.log2(a) - np.log2(b)


def llr_statistic(samples, p0_hat: Distribution, p1_hat: Distribution) -> float:
    """Sum over the block of log2(P0hat(s)/P1hat(s)); symbols are 0-based."""
    samples = np.asarray(samples, dtype=np.intp)
    m = len(p0_hat)
    if samples.size and (samples.min() < 0 or samples.max() >= m):
        raise IndexError(f"symbols must lie in [0, {m})")
    return float(np.round(llr_table(p0_hat, p1_hat)[samples].sum(), STAT_DECIMALS))


def sample_block(p: Distribution, c: Compressor, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. letters from ``p`` by inverse CDF and map them through ``c``."""
    return _sample(p.probs, c.labels, (n,), rng)


def _sample(probs, labels, shape, rng):
    cdf = np.cumsum(probs)
    cdf[-1] = np.inf  # guard against u >= round-off total
    letters = np.searchsorted(cdf, rng.random(shape), side="right")
    # zero-mass letters never appear: searchsorted skips flat cdf runs
    return labels[letters]


def _stats_chunk(probs, labels, table, n, seed, theta, k, size):
    symbols = _sample(probs, labels, (size, n), block_rng(seed, theta, k))
    return np.round(table[symbols].sum(axis=1), STAT_DECIMALS)


def block_statistics(p: Distribution, c: Compressor, table: np.ndarray, n: int,
                     trials: int, seed: int, theta: int, workers: int = 1) -> np.ndarray:
    """LLR statistics of ``trials`` independent blocks drawn from ``p``."""
    labels = c.labels
    jobs = [(p.probs, labels, table, n, seed, theta, k, size) for k, size in _chunks(trials)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _stats_chunk(*a), jobs))
    else:
        parts = [_stats_chunk(*a) for a in jobs]
    return np.concatenate(parts)


def allowed_rejections(epsilon: float, trials: int) -> int:
    """Largest count k with k / trials < epsilon."""
    k = max(math.ceil(epsilon * trials) - 1, 0)
    while k > 0 and k / trials >= epsilon:
        k -= 1
    while (k + 1) / trials < epsilon:
        k += 1
    return k


def threshold_from_statistics(stats: np.ndarray, epsilon: float) -> float:
    """Largest threshold whose empirical rejection rate (stats < T) stays below epsilon."""
    ordered = np.sort(stats)
    return float(ordered[allowed_rejections(epsilon, ordered.size)])


def calibrate_threshold(h: HypothesisPair, c: Compressor, cfg: TestConfig, workers: int = 1) -> float:
    """Empirical log2 T from ``cfg.trials_per_hypothesis`` blocks drawn under H0."""
    p0_hat, p1_hat = induced_distribution(c, h.p0), induced_distribution(c, h.p1)
    stats = block_statistics(h.p0, c, llr_table(p0_hat, p1_hat), cfg.blocklength,
                             cfg.trials_per_hypothesis, cfg.seed, 0, workers)
    return threshold_from_statistics(stats, cfg.epsilon)


def _exponent(beta: float, n: int) -> float | None:
    return None if beta <= 0 else max(-math.log2(beta) / n, 0.0)


def simulate_errors(h: HypothesisPair, c: Compressor, cfg: TestConfig,
                    workers: int = 1, estimator: str = "count") -> TestResult:
    """Calibrate on H0 blocks, then estimate the type-II rate on fresh H1 blocks.

    ``estimator="count"`` reports the fraction of H1 blocks accepted as H0.
    ``estimator="tilted"`` draws the H1-side blocks from the exponentially
    tilted law P0hat^t P1hat^(1-t) centred on the threshold and reweights;
    it resolves type-II rates far below 1/trials.
    """
    if estimator not in ("count", "tilted"):
        raise ValueError(f"unknown estimator {estimator!r}")
    n, N = cfg.blocklength, cfg.trials_per_hypothesis
    p0_hat, p1_hat = induced_distribution(c, h.p0), induced_distribution(c, h.p1)
    table = llr_table(p0_hat, p1_hat)

    h0 = block_statistics(h.p0, c, table, n, N, cfg.seed, 0, workers)
    threshold = threshold_from_statistics(h0, cfg.epsilon)
    type1 = np.count_nonzero(h0 < threshold) / N

    if estimator == "count":
        h1 = block_statistics(h.p1, c, table, n, N, cfg.seed, 1, workers)
        beta = np.count_nonzero(h1 >= threshold) / N
        stderr = math.sqrt(beta * (1.0 - beta) / N)
    else:
        beta, stderr = _tilted_type2(p0_hat, p1_hat, table, threshold, n, N, cfg.seed, workers)

    return TestResult(
        threshold_log_t=threshold,
        type1_rate=type1,
        type2_rate=beta,
        type2_exponent_bits=_exponent(beta, n),
        exact_zero=beta == 0,
        trials=N,
        seed=cfg.seed,
        type2_stderr=stderr,
    )


def tilted_law(p0_hat: Distribution, p1_hat: Distribution, target_mean: float) -> np.ndarray:
    """Member of P0^t P1^(1-t), t in [0, 1], whose mean LLR is closest to ``target_mean``."""
    a, b = p0_hat.probs, p1_hat.probs
    table = llr_table(p0_hat, p1_hat)
    support = (a > 0) & (b > 0)

    def law(t):
        w = np.zeros_like(a)
        w[support] = np.exp(t * np.log(a[support]) + (1 - t) * np.log(b[support]))
        return w / w.sum()

    def mean(t):
        return float(np.dot(law(t)[support], table[support]))

    if target_mean <= mean(0.0):
        return law(0.0)
    if target_mean >= mean(1.0):
        return law(1.0)
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean(mid) < target_mean:
            lo = mid
        else:
            hi = mid
    return law(0.5 * (lo + hi))


def _tilted_type2(p0_hat, p1_hat, table, threshold, n, N, seed, workers):
    proposal = tilted_law(p0_hat, p1_hat, threshold / n)
    with np.errstate(divide="ignore"):
        log_w = np.log2(p1_hat.probs) - np.log2(proposal)
    identity = np.arange(len(p0_hat))
    jobs = list(_chunks(N))

    def run(job):
        k, size = job
        symbols = _sample(proposal, identity, (size, n), block_rng(seed, 1, k))
        accept = np.round(table[symbols].sum(axis=1), STAT_DECIMALS) >= threshold
        return np.where(accept, log_w[symbols].sum(axis=1), -np.inf)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            logs = np.concatenate(list(pool.map(run, jobs)))
    else:
        logs = np.concatenate([run(j) for j in jobs])
    top = logs.max()
    if not np.isfinite(top):
        return 0.0, 0.0
    scaled = np.exp2(logs - top)
    beta = float(np.exp2(top) * scaled.mean())
    stderr = float(np.exp2(top) * scaled.std() / math.sqrt(N))
    return beta, stderr


def exponent_convergence_probe(h: HypothesisPair, c: Compressor, epsilon: float,
                               n_values, trials: int, seed: int,
                               estimator: str = "tilted", workers: int = 1):
    """Return ``[(n, exponent_estimate), ...]`` for each blocklength.

    The estimates should approach D(P0hat||P1hat) as n grows.
    """
    out = []
    for n in n_values:
        res = simulate_errors(h, c, TestConfig(n, epsilon, trials, seed),
                              workers=workers, estimator=estimator)
        out.append((n, res.type2_exponent_bits))
    return out


def compressed_kl(h: HypothesisPair, c: Compressor) -> float:
    return kl_divergence(induced_distribution(c, h.p0), induced_distribution(c, h.p1))
