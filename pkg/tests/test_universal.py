import numpy as np
import pytest
from scipy.optimize import minimize

from conftest import random_pair
from hypcomp.compressor import Compressor
from hypcomp.prob import Distribution, HypothesisPair, binomial_pair, kl_divergence
from hypcomp.universal import capped_projection, solve_q_star, universal_compress


def grid_minimax(p0, p1, cap, step=1e-3):
    """Smallest max(D(p0||Q), D(p1||Q)) over a 3-letter grid with Q <= cap."""
    ticks = np.arange(1, round(1 / step)) * step
    a, b = np.meshgrid(ticks, ticks, indexing="ij")
    c = 1.0 - a - b
    keep = (a <= cap) & (b <= cap) & (c <= cap + 1e-12) & (c > 0)
    q = np.stack([a[keep], b[keep], c[keep]], axis=1)
    d0 = (p0 * np.log2(p0 / q)).sum(axis=1)
    d1 = (p1 * np.log2(p1 / q)).sum(axis=1)
    return np.maximum(d0, d1).min()


def reference_minimax(p0, p1, cap):
    """High-precision epigraph solve of min max(D(p0||Q), D(p1||Q)) with SLSQP."""
    n = p0.size

    def kl(p, q):
        return float(np.sum(p * np.log2(p / q)))

    cons = [
        {"type": "eq", "fun": lambda z: z[:n].sum() - 1.0},
        {"type": "ineq", "fun": lambda z: z[n] - kl(p0, z[:n])},
        {"type": "ineq", "fun": lambda z: z[n] - kl(p1, z[:n])},
    ]
    start = np.append(np.full(n, 1.0 / n), max(kl(p0, np.full(n, 1.0 / n)), kl(p1, np.full(n, 1.0 / n))))
    bounds = [(1e-9, cap)] * n + [(0, None)]
    res = minimize(lambda z: z[n], start, method="SLSQP", bounds=bounds, constraints=cons,
                   options={"ftol": 1e-14, "maxiter": 500})
    return res.fun


class TestCappedProjection:
    def test_no_clip(self):
        m = np.array([0.2, 0.3, 0.5])
        np.testing.assert_allclose(capped_projection(m, 0.5), m)

    def test_clip_and_redistribute(self):
        q = capped_projection(np.array([0.7, 0.2, 0.1]), 0.5)
        np.testing.assert_allclose(q, [0.5, 1 / 3, 1 / 6])

    def test_infeasible(self):
        with pytest.raises(ValueError):
            capped_projection(np.array([0.5, 0.5]), 0.25)


class TestQStar:
    def test_equal_hypotheses(self):
        p = np.array([0.3, 0.25, 0.25, 0.2])
        # every entry sits below the 1/3 cap, so Q* = p is feasible
        q, delta = solve_q_star(HypothesisPair(Distribution(p), Distribution(p)), 3)
        np.testing.assert_allclose(q.probs, p, atol=1e-12)
        assert delta == pytest.approx(0.0, abs=1e-12)

    def test_uniform_full_rate(self):
        p = np.full(4, 0.25)
        q, delta = solve_q_star(HypothesisPair(Distribution(p), Distribution(p)), 4)
        np.testing.assert_allclose(q.probs, p)
        assert delta == pytest.approx(0.0, abs=1e-15)

    def test_uniform_two_letters(self):
        h = HypothesisPair(Distribution([0.5, 0.5]), Distribution([0.5, 0.5]))
        q, delta = solve_q_star(h, 2)
        np.testing.assert_allclose(q.probs, [0.5, 0.5])
        assert delta == 0.0

    def test_grid_oracle(self, rng):
        for _ in range(10):
            h = random_pair(rng, 3)
            q, delta = solve_q_star(h, 2)
            assert np.all(q.probs <= 0.5 + 1e-12)
            oracle = grid_minimax(h.p0.probs, h.p1.probs, 0.5)
            assert delta <= oracle + 1e-12
            assert delta == pytest.approx(oracle, abs=1e-3)

    @pytest.mark.filterwarnings("ignore:Values in x were outside bounds")
    def test_matches_reference_optimiser(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(3, 6))
            h = random_pair(rng, n)
            M = int(rng.integers(2, n + 1))
            _, delta = solve_q_star(h, M)
            assert delta == pytest.approx(reference_minimax(h.p0.probs, h.p1.probs, 1.0 / M), abs=1e-6)

    def test_equidistant_when_interior(self, rng):
        h = random_pair(rng, 5)
        q, delta = solve_q_star(h, 2)
        d0, d1 = kl_divergence(h.p0, q), kl_divergence(h.p1, q)
        assert max(d0, d1) == pytest.approx(delta)
        assert np.all(q.probs <= 0.5 + 1e-12)

    def test_argument_checks(self, rng):
        h = random_pair(rng, 3)
        for M in (1, 4):
            with pytest.raises(ValueError):
                solve_q_star(h, M)
        with pytest.raises(ValueError):
            solve_q_star(h, 2, tol=0.0)


class TestUniversal:
    def test_full_rate_identity(self, rng):
        h = random_pair(rng, 5)
        assert universal_compress(h, 5) == Compressor.identity(5)

    def test_decreasing_q_star(self):
        # geometric-ish decreasing sources give Q* decreasing in the letter index
        h = HypothesisPair(Distribution([0.4, 0.3, 0.2, 0.1]), Distribution([0.35, 0.3, 0.2, 0.15]))
        q, _ = solve_q_star(h, 2)
        assert np.all(np.diff(q.probs) < 0)
        assert universal_compress(h, 2).groups == ((0,), (1, 2, 3))

    def test_binomial_tails_pooled(self):
        h = binomial_pair(13, 0.4, 0.6)
        c = universal_compress(h, 4)
        pooled = max(c.groups, key=len)
        singles = sorted(g[0] for g in c.groups if len(g) == 1)
        assert len(singles) == 3
        # head letters kept around the centre, both tails merged
        assert singles == [5, 6, 7]
        assert {0, 1, 11, 12} <= set(pooled)

    @pytest.mark.parametrize("n", [3, 6, 9])
    def test_single_catch_all(self, rng, n):
        h = random_pair(rng, n)
        for M in range(2, n):
            c = universal_compress(h, M)
            assert c.rate_symbols == M
            assert sum(len(g) > 1 for g in c.groups) == 1

    def test_range(self, rng):
        h = random_pair(rng, 4)
        with pytest.raises(ValueError):
            universal_compress(h, 1)
