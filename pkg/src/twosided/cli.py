"""Command-line experiment runner.

Exit status: 0 when every assertion passes, 1 when one fails, 2 for a bad
configuration (unreadable market, incompatible mechanism, guard exceeded).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .allocator import EXACT, GREEDY, AllocatorConfig, MonteCarlo
from .errors import ConfigurationError, InstanceTooLarge, TwoSidedError
from .io import load_market
from .market import ExchangeMarket, TwoSidedMarket, exchange_expected_opt, expected_opt
from .mechanisms import ADD, KINDS, FixedPriceDemo, NoTrade, PostedPriceMechanism
from .numeric import format_number, to_number
from .verification import (
    ALL_CHECKS,
    BUYER,
    DOMINANT,
    SELLER,
    Agent,
    Bayes,
    HarnessReport,
    Row,
    approximation_harness,
    deviation_test,
    sbb_harness,
)

log = logging.getLogger("twosided")

SBB = "sbb"
INCENTIVES = "incentives"
CHECK_NAMES = ALL_CHECKS + (INCENTIVES,)
CSV_COLUMNS = ("quantity", "mean", "std_error", "target", "tolerance", "pass")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    market: Path
    mechanism: str
    allocator: str = EXACT
    runs: int = 10_000
    seed: int = 0
    opt: str = "exact"
    checks: tuple[str, ...] = ALL_CHECKS
    out: Path | None = None
    format: str = "json"
    inner: str = "no-trade"

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigurationError("--runs must be at least 1")
        if self.mechanism not in KINDS + (SBB,):
            raise ConfigurationError(f"unknown mechanism {self.mechanism!r}")
        unknown = set(self.checks) - set(CHECK_NAMES)
        if unknown:
            raise ConfigurationError(f"unknown checks {sorted(unknown)}; choose from {list(CHECK_NAMES)}")


def parse_opt(text: str, seed: int):
    if text == "exact":
        return EXACT
    if text.startswith("mc:"):
        try:
            return MonteCarlo(int(text[3:]), seed)
        except ValueError:
            pass
    raise ConfigurationError(f"--opt must be 'exact' or 'mc:N', got {text!r}")


def parse_inner(text: str):
    """``no-trade`` or ``fixed:PRICE:SPREAD``."""
    if text == "no-trade":
        return NoTrade()
    parts = text.split(":")
    if len(parts) == 3 and parts[0] == "fixed":
        try:
            return FixedPriceDemo(to_number(parts[1]), to_number(parts[2]))
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigurationError(f"--inner must be 'no-trade' or 'fixed:PRICE:SPREAD', got {text!r}")


def _fmt(x) -> str | float | None:
    if x is None:
        return None
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return format_number(Fraction(x))
    return float(x)


def _plan_summary(mech: PostedPriceMechanism) -> dict:
    plan, market = mech.plan, mech.market
    offers = []
    for j in range(market.m):
        items = plan.seller_high[j] if mech.buyers_first else market.endowment[j]
        if items and items <= plan.high:
            record = plan.offer(j, items)
            offers.append({"seller": j, "items": sorted(items), "q": _fmt(record.q), "accept": _fmt(record.accept_probability)})
        else:
            offers.append({"seller": j, "items": sorted(items) if mech.buyers_first else [], "q": None, "accept": None})
    return {
        "high": sorted(plan.high),
        "prices": {str(i): _fmt(p) for i, p in sorted(plan.prices.items())},
        "buyer_contributions": [_fmt(x) for x in plan.buyer_contributions],
        "seller_contributions": [_fmt(x) for x in plan.seller_contributions],
        "offers": offers,
    }


def _incentive_rows(mech: PostedPriceMechanism, runs: int, seed: int) -> list[Row]:
    rows = []
    market = mech.market
    agents = [Agent(SELLER, j) for j in range(market.m)] + [Agent(BUYER, i) for i in range(market.n)]
    for agent in agents:
        scope = Bayes(runs, seed) if agent.side == BUYER and mech.kind == ADD else DOMINANT
        report = deviation_test(mech, agent, scope=scope)
        worst = report.worst
        err = worst.std_error if worst else 0.0
        label = "dominant" if scope == DOMINANT else "bayes"
        rows.append(Row(f"max deviation gain {agent} ({label})", report.max_gain, err, "<=0", 3 * err, report.passed))
    return rows


def run_experiment(cfg: ExperimentConfig) -> tuple[dict, HarnessReport]:
    market = load_market(cfg.market)
    opt_mode = parse_opt(cfg.opt, cfg.seed)
    if cfg.mechanism == SBB:
        if isinstance(market, TwoSidedMarket):
            market = ExchangeMarket.from_two_sided(market)
        inner = parse_inner(cfg.inner)
        opt = None
        if opt_mode == EXACT:
            opt = exchange_expected_opt(market)
        report = sbb_harness(market, inner, cfg.runs, cfg.seed, opt)
        plan = {"inner": repr(inner)}
    else:
        if not isinstance(market, TwoSidedMarket):
            raise ConfigurationError("posted-price mechanisms need a market with buyers and sellers")
        allocator = AllocatorConfig() if cfg.allocator == EXACT else AllocatorConfig.greedy()
        mech = PostedPriceMechanism.build(market, cfg.mechanism, allocator)
        plan = _plan_summary(mech)
        log.info("priced items L=%s", plan["high"])
        log.info("prices p=%s", plan["prices"])
        for offer in plan["offers"]:
            log.info("seller %d: items %s, q=%s", offer["seller"], offer["items"], offer["q"])
        opt = expected_opt(market, opt_mode)
        harness_checks = [c for c in cfg.checks if c in ALL_CHECKS]
        report = approximation_harness(mech, cfg.runs, cfg.seed, opt, checks=harness_checks)
        if INCENTIVES in cfg.checks:
            rows = report.rows + tuple(_incentive_rows(mech, cfg.runs, cfg.seed))
            report = HarnessReport(report.mechanism, report.runs, report.seed, report.alpha, report.opt, rows, report.counts)
    document = {
        "config": {
            "market": str(cfg.market),
            "mechanism": cfg.mechanism,
            "allocator": cfg.allocator,
            "runs": cfg.runs,
            "seed": cfg.seed,
            "opt": cfg.opt,
            "checks": list(cfg.checks),
        },
        "plan": plan,
        "rows": [_row_dict(r) for r in report.rows],
        "passed": report.passed,
    }
    return document, report


def _row_dict(row: Row) -> dict:
    return {
        "quantity": row.quantity,
        "mean": _fmt(row.mean),
        "std_error": float(row.std_error),
        "target": row.target,
        "tolerance": None if row.tolerance is None else float(row.tolerance),
        "pass": row.passed,
    }


def render(document: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(document, indent=2) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in document["rows"]:
        cells = dict(row)
        if isinstance(cells["mean"], str):
            cells["mean"] = float(Fraction(cells["mean"]))
        writer.writerow(["" if cells[c] is None else cells[c] for c in CSV_COLUMNS])
    return buffer.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twosided", description="Run posted-price market experiments.")
    p.add_argument("--market", required=True, type=Path, help="market JSON file")
    p.add_argument("--mechanism", required=True, choices=KINDS + (SBB,))
    p.add_argument("--allocator", choices=(EXACT, GREEDY), default=EXACT)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--opt", default="exact", help="'exact' or 'mc:N'")
    p.add_argument("--checks", default=",".join(ALL_CHECKS), help=f"comma list from {','.join(CHECK_NAMES)}, or 'all'")
    p.add_argument("--inner", default="no-trade", help="sbb inner mechanism: 'no-trade' or 'fixed:PRICE:SPREAD'")
    p.add_argument("--out", type=Path, help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-v", "--verbose", action="store_true", help="log the pricing plan")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    checks = CHECK_NAMES if args.checks == "all" else tuple(c for c in args.checks.split(",") if c)
    try:
        cfg = ExperimentConfig(
            args.market, args.mechanism, args.allocator, args.runs, args.seed, args.opt, checks, args.out, args.format, args.inner
        )
        document, report = run_experiment(cfg)
    except InstanceTooLarge as exc:
        print(f"error: {exc}" + (f" (hint: {exc.hint})" if exc.hint else ""), file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, TwoSidedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(document, cfg.format)
    if cfg.out:
        cfg.out.write_text(text)
    else:
        sys.stdout.write(text)
    for row in report.assertions:
        if not row.passed:
            print(f"FAIL {row.quantity}: {row.mean} (target {row.target}, tolerance {row.tolerance})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
