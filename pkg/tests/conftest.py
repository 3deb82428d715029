import numpy as np
import pytest

from hypcomp.prob import Distribution, HypothesisPair

ACCEPTANCE_MODULE = "test_acceptance.py"


def random_pair(rng, n, concentration=1.0):
    """Strictly positive random hypothesis pair on n letters."""
    while True:
        p0 = rng.dirichlet(np.full(n, concentration))
        p1 = rng.dirichlet(np.full(n, concentration))
        if p0.min() > 1e-12 and p1.min() > 1e-12:
            return HypothesisPair(Distribution(p0 / p0.sum()), Distribution(p1 / p1.sum()))


def random_labels(rng, n, k=None):
    """Random labelling of n letters using every one of k block ids."""
    k = k or int(rng.integers(1, n + 1))
    labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    rng.shuffle(labels)
    return labels.tolist()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            if ACCEPTANCE_MODULE in rep.nodeid:
                lines.append((rep.nodeid.split("::")[-1], outcome))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            status = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"{status}  {name}")
