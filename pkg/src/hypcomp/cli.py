"""Command-line entry point: ``hypcomp design | simulate | show-compressor``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .compressor import design_report
from .experiment import (
    METHODS,
    BinomialSource,
    ExperimentConfig,
    FileSource,
    build_compressor,
    emit,
    run_design_sweep,
    run_error_sweep,
)
from .hyptest import DEFAULT_TRIALS, TestConfig, simulate_errors
from .optimal import DEFAULT_BUDGET, BudgetExceededError

log = logging.getLogger("hypcomp")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INFEASIBLE = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def parse_rates(text: str) -> list[int]:
    """``"2,3,8"`` or an inclusive range ``"2:12"``."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --rates value {text!r}") from exc


def _add_source(p):
    p.add_argument("--alphabet-size", type=int, default=13)
    p.add_argument("--s0", type=float, default=0.4)
    p.add_argument("--s1", type=float, default=0.6)
    p.add_argument("--dist-file", help='JSON file {"p0": [...], "p1": [...]}; overrides the binomial source')
    p.add_argument("--optimal-budget", type=int, default=DEFAULT_BUDGET)


def _add_test(p):
    p.add_argument("--blocklength", type=int, default=5)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="threads for block simulation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypcomp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("design", "penalty sweep over M"), ("simulate", "type-I/II error sweep over M")):
        p = sub.add_parser(name, help=help_)
        _add_source(p)
        p.add_argument("--methods", default="greedy,universal")
        p.add_argument("--rates", default=None, help="comma list or a:b range (default 2:|X|-1)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if name == "simulate":
            _add_test(p)

    p = sub.add_parser("show-compressor", help="groups and compressed distributions for one design")
    _add_source(p)
    p.add_argument("--method", choices=METHODS, default="greedy")
    p.add_argument("--rate", type=int, default=4, help="number of compressed symbols M")
    p.add_argument("--simulate", action="store_true", help="also run the error simulation")
    _add_test(p)
    p.add_argument("--out", default=None)
    return parser


def _source(args):
    if args.dist_file:
        return FileSource(args.dist_file)
    return BinomialSource(args.alphabet_size, args.s0, args.s1)


def _config(args):
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    source = _source(args)
    pair = source.pair()
    rates = parse_rates(args.rates) if args.rates else list(range(2, pair.alphabet_size))
    test = TestConfig(args.blocklength, args.epsilon, args.trials, args.seed) \
        if args.command == "simulate" else TestConfig()
    cfg = ExperimentConfig(source, methods, tuple(rates), test, args.format, args.out,
                           args.optimal_budget)
    cfg.validate_rates(pair.alphabet_size)
    return cfg, pair


def _write(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _run(args) -> int:
    if args.command == "show-compressor":
        source = _source(args)
        pair = source.pair()
        try:
            c = build_compressor(pair, args.method, args.rate, args.optimal_budget)
        except BudgetExceededError as exc:
            log.error("%s", exc)
            return EXIT_INFEASIBLE
        out = design_report(pair, c).to_dict()
        if args.simulate:
            cfg = TestConfig(args.blocklength, args.epsilon, args.trials, args.seed)
            out["test"] = simulate_errors(pair, c, cfg, workers=args.workers).to_dict()
        _write(json.dumps(out, indent=2) + "\n", args.out)
        return EXIT_OK

    cfg, pair = _config(args)
    if args.command == "design":
        records = run_design_sweep(cfg, pair)
    else:
        records = run_error_sweep(cfg, pair, workers=args.workers)
    text = emit(records, cfg.output_format)
    _write(text, cfg.output_path)
    if all(r.skipped for r in records):
        log.error("every requested design exceeded the optimal-search budget")
        return EXIT_INFEASIBLE
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename)
        return EXIT_IO
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except (ConfigError, ValueError, KeyError, json.JSONDecodeError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
