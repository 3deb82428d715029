"""Rate sweeps over design methods, producing rows for penalty and error-rate plots."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .compressor import Compressor, design_report, greedy_compress
from .hyptest import TestConfig, simulate_errors
from .optimal import DEFAULT_BUDGET, BudgetExceededError, optimal_compress
from .prob import HypothesisPair, binomial_pair, load_pair
from .universal import universal_compress

METHODS = ("identity", "greedy", "optimal", "universal")
CSV_HEADER = [
    "method", "M", "rate_bits", "exponent_bits", "penalty_bits",
    "type1_rate", "type2_rate", "exact_zero", "seed",
]
SKIPPED = "skipped: budget"


@dataclass(frozen=True)
class BinomialSource:
    alphabet_size: int
    s0: float
    s1: float

    def pair(self) -> HypothesisPair:
        return binomial_pair(self.alphabet_size, self.s0, self.s1)


@dataclass(frozen=True)
class FileSource:
    path: str

    def pair(self) -> HypothesisPair:
        return load_pair(self.path)


@dataclass(frozen=True)
class ExperimentConfig:
    source: BinomialSource | FileSource
    methods: tuple[str, ...]
    rates: tuple[int, ...]
    test: TestConfig = field(default_factory=TestConfig)
    output_format: str = "csv"
    output_path: str | None = None
    optimal_budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "rates", tuple(int(m) for m in self.rates))
        if not self.methods:
            raise ValueError("at least one method is required")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if not self.rates:
            raise ValueError("at least one rate is required")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output format must be csv or json")

    def validate_rates(self, alphabet_size: int):
        bad = [m for m in self.rates if not 2 <= m <= alphabet_size]
        if bad:
            raise ValueError(f"rates {bad} outside [2, {alphabet_size}]")

    def to_dict(self) -> dict:
        src = asdict(self.source)
        src["kind"] = "binomial" if isinstance(self.source, BinomialSource) else "file"
        return {
            "source": src,
            "methods": list(self.methods),
            "rates": list(self.rates),
            "test": asdict(self.test),
            "output_format": self.output_format,
            "output_path": self.output_path,
            "optimal_budget": self.optimal_budget,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        src = dict(data["source"])
        kind = src.pop("kind")
        source = BinomialSource(**src) if kind == "binomial" else FileSource(**src)
        return cls(
            source=source,
            methods=tuple(data["methods"]),
            rates=tuple(data["rates"]),
            test=TestConfig(**data["test"]),
            output_format=data["output_format"],
            output_path=data["output_path"],
            optimal_budget=data["optimal_budget"],
        )


@dataclass(frozen=True)
class SweepRecord:
    method: str
    M: int
    rate_bits: float
    exponent_bits: float | None
    penalty_bits: float | None
    type1_rate: float | None = None
    type2_rate: float | None = None
    exact_zero: bool | None = None
    seed: int | None = None
    type2_stderr: float | None = None
    skipped: str | None = None

    @property
    def sort_key(self):
        return (self.method, self.M)


def build_compressor(h: HypothesisPair, method: str, M: int,
                     optimal_budget: int | None = DEFAULT_BUDGET) -> Compressor:
    if method == "identity":
        return Compressor.identity(h.alphabet_size)
    if method == "greedy":
        return greedy_compress(h, M)
    if method == "optimal":
        return optimal_compress(h, M, budget=optimal_budget)
    if method == "universal":
        return universal_compress(h, M)
    raise ValueError(f"unknown method {method!r}")


def _designs(cfg: ExperimentConfig, h: HypothesisPair):
    cfg.validate_rates(h.alphabet_size)
    for method in sorted(set(cfg.methods)):
        for M in sorted(set(cfg.rates)):
            try:
                c = build_compressor(h, method, M, cfg.optimal_budget)
            except BudgetExceededError:
                yield method, M, None
                continue
            yield method, M, c


def _record(h, method, M, c, result=None):
    if c is None:
        return SweepRecord(method, M, math.log2(M), None, None, skipped=SKIPPED)
    rep = design_report(h, c)
    extra = {}
    if result is not None:
        extra = dict(
            type1_rate=result.type1_rate,
            type2_rate=result.type2_rate,
            exact_zero=result.exact_zero,
            seed=result.seed,
            type2_stderr=result.type2_stderr,
        )
    return SweepRecord(method, M, math.log2(M), rep.exponent_bits, rep.penalty_bits, **extra)


def run_design_sweep(cfg: ExperimentConfig, h: HypothesisPair | None = None) -> list[SweepRecord]:
    """Penalty and exponent for every (method, M); no sampling."""
    h = h or cfg.source.pair()
    return [_record(h, method, M, c) for method, M, c in _designs(cfg, h)]


def run_error_sweep(cfg: ExperimentConfig, h: HypothesisPair | None = None,
                    workers: int = 1) -> list[SweepRecord]:
    """Design sweep plus a Monte Carlo type-I/type-II estimate per record."""
    h = h or cfg.source.pair()
    out = []
    for method, M, c in _designs(cfg, h):
        result = None if c is None else simulate_errors(h, c, cfg.test, workers=workers)
        out.append(_record(h, method, M, c, result))
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, str)):
        return str(v)
    return f"{v:.12g}"


def _num(v):
    if isinstance(v, float):
        return float(f"{v:.12g}")
    return v


def render(records, fmt: str = "csv") -> str:
    """Serialise records sorted by (method, M) as CSV or a JSON array."""
    records = sorted(records, key=lambda r: r.sort_key)
    if fmt == "json":
        rows = [{k: _num(v) for k, v in asdict(r).items()} for r in records]
        return json.dumps(rows, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError("format must be csv or json")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        row = [_fmt(getattr(r, k)) for k in CSV_HEADER]
        if r.skipped:
            row[3] = row[4] = r.skipped
        writer.writerow(row)
    return buf.getvalue()


def emit(records, fmt: str = "csv", path: str | Path | None = None) -> str:
    text = render(records, fmt)
    if path is not None:
        Path(path).write_text(text)
    return text
