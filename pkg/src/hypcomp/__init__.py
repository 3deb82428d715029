"""Single-shot compressors designed for binary hypothesis testing at a remote receiver."""

from .compressor import (
    Compressor,
    DesignReport,
    design_report,
    greedy_compress,
    group_posterior,
    induced_distribution,
    merge_cost,
    penalty_direct,
    penalty_grouped,
)
from .hyptest import (
    TestConfig,
    TestResult,
    calibrate_threshold,
    exponent_convergence_probe,
    llr_statistic,
    sample_block,
    simulate_errors,
)
from .optimal import BudgetExceededError, optimal_compress, stirling2
from .prob import (
    AbsoluteContinuityError,
    BinomialSpec,
    DimensionMismatchError,
    Distribution,
    HypothesisPair,
    binomial_pair,
    binomial_source,
    kl_divergence,
    load_pair,
)
from .universal import solve_q_star, universal_compress

__version__ = "0.1.0"
