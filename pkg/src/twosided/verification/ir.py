"""Individual rationality: taking part never leaves an agent worse off than staying out.

A buyer who stays out gets nothing and pays nothing; a seller keeps her
endowment.  Ex post checks one outcome; interim checks per-agent means over
replications.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from ..market import Outcome, TwoSidedMarket
from ..mechanisms.posted import PostedPriceMechanism
from ..numeric import TOL, Number, is_exact
from ..stochastic import ScriptedRng, enumerate_profiles
from ..valuations import Valuation, bundle_mask
from .replication import estimate


@dataclass(frozen=True)
class IRReport:
    ok: bool
    worst_agent: str | None
    worst_value: Number  # smallest utility gain over the baseline (or mean minus 3 std errors)
    values: tuple = ()


def utility_gains(
    market: TwoSidedMarket, v: Sequence[Valuation], w: Sequence[Valuation], out: Outcome
) -> list[tuple[str, Number]]:
    gains = [
        (f"buyer {i}", vi.value_of_mask(bundle_mask(x)) - p)
        for i, (vi, x, p) in enumerate(zip(v, out.buyer_bundles, out.buyer_payments))
    ]
    gains += [
        (f"seller {j}", wj.value_of_mask(bundle_mask(y)) - p - wj.value_of_mask(bundle_mask(own)))
        for j, (wj, y, p, own) in enumerate(zip(w, out.seller_bundles, out.seller_payments, market.endowment))
    ]
    return gains


def _negative(x: Number) -> bool:
    return x < 0 if is_exact(x) else x < -TOL


def check_ir(market: TwoSidedMarket, v, w, out: Outcome) -> IRReport:
    """Ex-post check of one outcome under the profile ``(v, w)``."""
    gains = utility_gains(market, v, w, out)
    if not gains:
        return IRReport(True, None, 0, ())
    agent, worst = min(gains, key=lambda g: g[1])
    return IRReport(not _negative(worst), agent, worst, tuple(gains))


def check_ir_exhaustive(mech: PostedPriceMechanism) -> IRReport:
    """Ex-post check over every type profile and every seller coin pattern."""
    market = mech.market
    worst: tuple[str | None, Number] = (None, 0)
    for _, profile in enumerate_profiles(market.buyer_dists + market.seller_dists):
        v, w = profile[: market.n], profile[market.n :]
        for pattern in itertools.product((1, 0), repeat=market.m):
            out = mech.run(v, w, ScriptedRng([0.0 if b else 1.0 for b in pattern])).outcome
            report = check_ir(market, v, w, out)
            if report.worst_agent is not None and (worst[0] is None or report.worst_value < worst[1]):
                worst = (report.worst_agent, report.worst_value)
    return IRReport(not _negative(worst[1]), worst[0], worst[1])


def check_ir_interim(market: TwoSidedMarket, counts: Counter) -> IRReport:
    """Per-agent mean utility gain must be at least ``-3`` standard errors."""
    values = []
    for i in range(market.n):
        est = estimate(counts, lambda r, i=i: r.buyer_utility[i])
        values.append((f"buyer {i}", est))
    for j in range(market.m):
        est = estimate(counts, lambda r, j=j: r.seller_gain[j])
        values.append((f"seller {j}", est))
    if not values:
        return IRReport(True, None, 0, ())
    agent, est = min(values, key=lambda a: float(a[1].mean) + 3 * a[1].std_error)
    slack = float(est.mean) + 3 * est.std_error
    return IRReport(slack >= -TOL, agent, slack, tuple(values))
