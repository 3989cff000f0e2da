"""Turning a weakly budget-balanced exchange mechanism into a strongly balanced one.

One agent, drawn uniformly, sits out with her endowment; the inner mechanism
runs on everyone else and its surplus is paid to the agent who sat out.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from ..errors import WBBViolation
from ..market import ExchangeMarket, ExchangeOutcome
from ..numeric import Number, geq, greater
from ..valuations import Valuation, bundle_mask


class ExchangeMechanism(Protocol):
    def __call__(self, market: ExchangeMarket, valuations: Sequence[Valuation], rng) -> ExchangeOutcome: ...


class NoTrade:
    """Everyone keeps her endowment and nobody pays."""

    def __call__(self, market, valuations, rng) -> ExchangeOutcome:
        return ExchangeOutcome(market.endowment, (0,) * market.n)

    def __repr__(self) -> str:
        return "NoTrade()"


@dataclass(frozen=True)
class FixedPriceDemo:
    """Toy posted-price exchange that keeps a spread on every trade.

    Items are visited in index order.  The current holder releases an item
    if losing it costs her at most ``price``; the first other agent (by index)
    whose gain is at least ``price + spread`` buys it.  The buyer pays
    ``price + spread`` and the holder receives ``price``, so the mechanism
    collects ``spread`` per trade.
    """

    price: Number
    spread: Number

    def __call__(self, market: ExchangeMarket, valuations, rng) -> ExchangeOutcome:
        holdings = [bundle_mask(b) for b in market.endowment]
        payments = [0] * market.n
        ask = self.price + self.spread
        for item in range(market.k):
            bit = 1 << item
            holder = next(a for a in range(market.n) if holdings[a] & bit)
            loss = valuations[holder].value_of_mask(holdings[holder]) - valuations[holder].value_of_mask(
                holdings[holder] & ~bit
            )
            if greater(loss, self.price):
                continue
            for a in range(market.n):
                if a == holder:
                    continue
                gain = valuations[a].value_of_mask(holdings[a] | bit) - valuations[a].value_of_mask(holdings[a])
                if geq(gain, ask):
                    holdings[holder] &= ~bit
                    holdings[a] |= bit
                    payments[a] = payments[a] + ask
                    payments[holder] = payments[holder] - self.price
                    break
        bundles = tuple(frozenset(i for i in range(market.k) if h >> i & 1) for h in holdings)
        return ExchangeOutcome(bundles, tuple(payments))


@dataclass(frozen=True)
class SbbRun:
    outcome: ExchangeOutcome
    excluded: int
    surplus: Number
    inner: ExchangeOutcome | None


def sbb_wrapper(market: ExchangeMarket, inner: ExchangeMechanism, valuations: Sequence[Valuation], rng) -> SbbRun:
    """Run ``inner`` without a uniformly drawn agent, who collects the surplus.

    Exactly one uniform is consumed for the draw before ``inner`` sees ``rng``.
    Raises :class:`WBBViolation` if the inner run pays out more than it takes in.
    """
    n = market.n
    excluded = min(int(rng.random() * n), n - 1)
    bundles = list(market.endowment)
    payments: list[Number] = [0] * n
    if n == 1:
        return SbbRun(ExchangeOutcome(tuple(bundles), tuple(payments)), excluded, 0, None)

    sub, agents, items = market.without(excluded)
    sub_valuations = tuple(valuations[a].project(items) for a in agents)
    result = inner(sub, sub_valuations, rng)
    surplus = sum(result.payments, 0)
    if not geq(surplus, 0):
        raise WBBViolation(surplus)
    for local, agent in enumerate(agents):
        bundles[agent] = frozenset(items[x] for x in result.bundles[local])
        payments[agent] = result.payments[local]
    payments[excluded] = -surplus
    return SbbRun(ExchangeOutcome(tuple(bundles), tuple(payments)), excluded, surplus, result)
