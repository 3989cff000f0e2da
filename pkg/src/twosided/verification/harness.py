"""Statistical harness: welfare against the optimum, seller-side and buyer-side bounds,
trade frequencies, the payment identity, and budget balance, from one set of
truthful replications.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from ..allocator import EXACT, AllocatorConfig, MonteCarlo, allocate, expected_item_contributions
from ..errors import WBBViolation
from ..market import ExchangeMarket, OptValue, expected_opt
from ..mechanisms.posted import PostedPriceMechanism
from ..mechanisms.sbb import sbb_wrapper
from ..numeric import TOL, Number, greater, is_exact
from ..pricing import PricingPlan, classify_items, seller_contributions
from ..stochastic import enumerate_profiles, replication_streams, sample_profile
from ..valuations import bundle_mask
from .budget import DecompositionError, check_sbb, decompose_trades
from .ir import check_ir_interim
from .replication import AUTO, estimate, simulate, single

APPROX = "approx"
BOUNDS = "bounds"
TRADE = "trade"
PAYMENTS = "payments"
BUDGET = "budget"
IR = "ir"
ALL_CHECKS = (APPROX, BOUNDS, TRADE, PAYMENTS, BUDGET, IR)


@dataclass(frozen=True)
class Row:
    """One reported quantity; ``target`` is empty for plain measurements."""

    quantity: str
    mean: Number
    std_error: float = 0.0
    target: str = ""
    tolerance: float | None = None
    passed: bool | None = None


def _at_least(name: str, value: Number, tolerance: float) -> Row:
    return Row(name, value, tolerance / 3, ">=0", tolerance, float(value) >= -tolerance - TOL)


def _near(name: str, value: Number, std_error: float, target: Number, tolerance: float) -> Row:
    ok = abs(float(value) - float(target)) <= tolerance + TOL
    return Row(name, value, std_error, f"={target}", tolerance, ok)


@dataclass(frozen=True)
class HarnessReport:
    mechanism: str
    runs: int
    seed: int
    alpha: Number
    opt: OptValue | None
    rows: tuple[Row, ...]
    counts: Counter = field(repr=False, compare=False, default_factory=Counter)

    @property
    def assertions(self) -> tuple[Row, ...]:
        return tuple(r for r in self.rows if r.passed is not None)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.assertions)

    def row(self, quantity: str) -> Row:
        return next(r for r in self.rows if r.quantity == quantity)

    @property
    def ratio(self) -> float | None:
        if self.opt is None:
            return None
        sw = float(self.row("sw").mean)
        return float(self.opt.opt) / sw if sw else math.inf


def payment_identity(plan: PricingPlan, owner_of, counts: Counter) -> tuple[Number, Number, float]:
    """``(mean buyer payments, identity side, combined standard error)``.

    The identity side is half the sum over priced items of price times the
    frequency with which the item sold among runs where its seller traded.
    Its error comes from the delta method on the same runs.
    """
    runs = sum(counts.values())
    lhs = estimate(counts, lambda r: r.total_buyer_payments)
    traded = {}
    sold = {}
    for item in plan.high:
        j = owner_of[item]
        traded[item] = sum(c for r, c in counts.items() if r.z[j])
        sold[item] = sum(c for r, c in counts.items() if r.sold[item])
    rhs = 0
    ratio = {}
    for item in sorted(plan.high):
        if traded[item]:
            ratio[item] = Fraction(sold[item], traded[item])
            rhs = rhs + plan.prices[item] * ratio[item]
    rhs = rhs / 2

    def influence(r):
        total = 0.0
        for item, rate in ratio.items():
            j = owner_of[item]
            share = traded[item] / runs
            total += float(plan.prices[item]) * (float(r.sold[item]) - float(rate) * float(r.z[j])) / share
        return total / 2

    rhs_err = estimate(counts, influence).std_error
    return lhs.mean, rhs, math.sqrt(lhs.std_error**2 + rhs_err**2)


def approximation_harness(
    mech: PostedPriceMechanism,
    runs: int,
    seed: int,
    opt: OptValue | None = None,
    opt_mode: str | MonteCarlo = EXACT,
    checks: Iterable[str] = ALL_CHECKS,
    trade_tolerance: float | None = None,
    engine: str = AUTO,
) -> HarnessReport:
    """Run ``runs`` truthful replications and evaluate the selected checks.

    ``trade_tolerance`` fixes the allowed deviation of each seller's trade
    frequency from 1/2; by default it is three binomial standard errors.
    """
    checks = set(checks)
    market, plan = mech.market, mech.plan
    alpha = plan.alpha
    if opt is None:
        opt = expected_opt(market, opt_mode)
    counts = single(simulate(mech, runs, seed, engine=engine))

    sw = estimate(counts, lambda r: r.sw)
    sw_b = estimate(counts, lambda r: r.sw_b)
    sw_s = estimate(counts, lambda r: r.sw_s)
    pay = estimate(counts, lambda r: r.total_buyer_payments)
    rows = [
        Row("sw", sw.mean, sw.std_error),
        Row("sw_buyers", sw_b.mean, sw_b.std_error),
        Row("sw_sellers", sw_s.mean, sw_s.std_error),
        Row("buyer_payments", pay.mean, pay.std_error),
        Row("opt", opt.opt, opt.std_error),
        Row("opt_buyers", opt.opt_buyers),
        Row("opt_sellers", opt.opt_sellers),
        Row("opt_over_sw", float(opt.opt) / float(sw.mean) if sw.mean else math.inf),
    ]
    # tolerances are three standard errors of the compared statistic itself
    if APPROX in checks:
        factor = float(2 + 4 * alpha)
        tol = 3 * math.sqrt((factor * sw.std_error) ** 2 + opt.std_error**2)
        rows.append(_at_least("approx: (2+4a)*sw - opt", (2 + 4 * alpha) * sw.mean - opt.opt, tol))
    if BOUNDS in checks:
        rows.append(_at_least("sellers: 2*sw_sellers - opt_sellers", 2 * sw_s.mean - opt.opt_sellers, 6 * sw_s.std_error))
        rows.append(
            _at_least("buyers: 4a*sw - opt_buyers", 4 * alpha * sw.mean - opt.opt_buyers, 12 * float(alpha) * sw.std_error)
        )
    if TRADE in checks:
        rows += _trade_rows(market.m, counts, runs, trade_tolerance)
    if PAYMENTS in checks:
        lhs, rhs, err = payment_identity(plan, market.owner_of, counts)
        rows.append(_near("payment identity: payments - half sum p*P[sold|traded]", lhs - rhs, err, 0, 3 * err))
    if BUDGET in checks:
        sbb = estimate(counts, lambda r: int(r.sbb))
        dsbb = estimate(counts, lambda r: int(r.dsbb))
        rows.append(_near("sbb rate", sbb.mean, sbb.std_error, 1, 0.0))
        rows.append(_near("direct trade rate", dsbb.mean, dsbb.std_error, 1, 0.0))
    if IR in checks:
        ir = check_ir_interim(market, counts)
        rows.append(Row(f"interim ir: worst mean + 3se ({ir.worst_agent})", ir.worst_value, 0.0, ">=0", 0.0, ir.ok))
    return HarnessReport(mech.kind, runs, seed, alpha, opt, tuple(rows), counts)


def _trade_rows(m: int, counts: Counter, runs: int, trade_tolerance: float | None) -> list[Row]:
    rows = []
    for j in range(m):
        demanded = sum(c for r, c in counts.items() if r.demanded[j])
        if not demanded:
            continue
        freq = estimate(counts, lambda r, j=j: int(r.z[j]))
        tol = trade_tolerance if trade_tolerance is not None else 3 * math.sqrt(0.25 / runs)
        rows.append(_near(f"trade frequency seller {j}", freq.mean, freq.std_error, Fraction(1, 2), tol))
        if demanded < runs:
            hits = sum(c for r, c in counts.items() if r.demanded[j] and r.z[j])
            rate = Fraction(hits, demanded)
            err = math.sqrt(float(rate * (1 - rate)) / demanded)
            rows.append(
                _near(
                    f"trade frequency seller {j} given demand",
                    rate,
                    err,
                    Fraction(1, 2),
                    3 * math.sqrt(0.25 / demanded),
                )
            )
    return rows


def cover_sellers_gap(market, allocator: AllocatorConfig = AllocatorConfig()) -> tuple[Number, Number]:
    """``(priced buyer contributions + 4 * unpriced seller values, expected allocator welfare)``.

    The first must be at least the second; both are exact expectations.
    """
    buyer_side = expected_item_contributions(allocator, market.buyer_dists, market.k, EXACT)
    seller_side = seller_contributions(market)
    high, low = classify_items(buyer_side, seller_side)
    lhs = sum((buyer_side[i] for i in high), 0) + 4 * sum((seller_side[i] for i in low), 0)
    rhs = 0
    for prob, v in enumerate_profiles(market.buyer_dists):
        rhs = rhs + prob * allocate(allocator, v, market.k).welfare(v)
    return lhs, rhs


def sbb_harness(market: ExchangeMarket, inner, runs: int, seed: int, opt: Number | None = None) -> HarnessReport:
    """Replicate the budget-balancing wrapper around ``inner``.

    Checks that every outcome balances exactly and, as a negative control,
    that every run with a positive surplus fails the trade decomposition
    (the agent who sat out is paid without trading).
    """
    sbb_ok = wbb_ok = surplus_runs = unexplained = 0
    welfare: Counter = Counter()
    surplus_total = 0
    for rng in replication_streams(seed, 0, runs):
        profile = sample_profile(market.dists, rng)
        try:
            run = sbb_wrapper(market, inner, profile, rng)
        except WBBViolation:
            continue
        wbb_ok += 1
        out = run.outcome
        sbb_ok += check_sbb(out).ok
        surplus_total = surplus_total + run.surplus
        welfare[sum((v.value_of_mask(bundle_mask(b)) for v, b in zip(profile, out.bundles)), 0)] += 1
        if greater(run.surplus, 0):
            surplus_runs += 1
            try:
                decompose_trades(market, out)
            except DecompositionError:
                unexplained += 1
    sw = estimate(welfare, lambda x: x)
    rows = [
        Row("sw", sw.mean, sw.std_error),
        Row("mean surplus", Fraction(surplus_total) / runs if is_exact(surplus_total) else surplus_total / runs),
        Row("surplus runs", surplus_runs),
        _near("inner wbb rate", Fraction(wbb_ok, runs), 0.0, 1, 0.0),
        _near("sbb rate", Fraction(sbb_ok, max(wbb_ok, 1)), 0.0, 1, 0.0),
    ]
    if surplus_runs:
        rows.append(_near("unexplained payment rate given surplus", Fraction(unexplained, surplus_runs), 0.0, 1, 0.0))
    if opt is not None:
        rows.insert(1, Row("opt", opt))
    return HarnessReport("sbb", runs, seed, 1, None, tuple(rows), welfare)
