"""Sequential posted-price mechanisms for two-sided markets.

``run_unit_supply`` approaches sellers first and then lets buyers pick from
the items put on the market.  ``run_add`` (and its additive-buyer variant)
collects buyer requests first and then approaches each seller with an offer
for the requested part of her high-welfare items.

Every run consumes exactly one uniform per seller, in seller order, whether
or not that seller is approached.  That keeps coins aligned between a
truthful run and a deviating run that share a stream.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from ..allocator import EXACT, AllocatorConfig, MonteCarlo
from ..errors import ConfigurationError, InstanceTooLarge, WrongMechanism
from ..market import Outcome, TwoSidedMarket
from ..numeric import Number, greater, is_exact
from ..pricing import PricingPlan, build_plan
from ..valuations import ItemBundle, Valuation, demand_set, subsets_in_order
from .strategies import TRUTHFUL, StrategyProfile

UNIT_SUPPLY = "unit-supply"
ADD = "add"
ADD_DSIC = "add-dsic"
KINDS = (UNIT_SUPPLY, ADD, ADD_DSIC)

BUNDLE_GUARD = 16
SELLER_PATTERN_GUARD = 20

EMPTY: ItemBundle = frozenset()
VACUOUS_Q = Fraction(1, 2)


@dataclass(frozen=True)
class OfferLog:
    seller: int
    items: ItemBundle
    payment: Number
    offered: bool
    accepted: bool


@dataclass
class MechanismRunState:
    """Trace of one run.

    ``available[i]`` is the item set buyer ``i`` chose from (the last entry is
    what was left).  ``z[j]`` is the offered-and-accepted indicator of seller
    ``j``; when her demanded bundle is empty it records the vacuous exchange
    of the empty bundle, which the offer rule makes with probability 1/2.
    ``thresholds[j]`` is the bound her coin was compared against; it is fixed
    before any coin is read.
    """

    available: list[ItemBundle] = field(default_factory=list)
    requests: list[ItemBundle] = field(default_factory=list)
    demanded: list[ItemBundle] = field(default_factory=list)
    z: list[bool] = field(default_factory=list)
    offers: list[OfferLog] = field(default_factory=list)
    thresholds: list[Number] = field(default_factory=list)


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    state: MechanismRunState


def _payments(plan: PricingPlan, bought, sold):
    buyer_payments = tuple(plan.price_of(b) for b in bought)
    seller_payments = tuple(-plan.price_of(s) for s in sold)
    return buyer_payments, seller_payments


def _check_profile(market: TwoSidedMarket, v: Sequence[Valuation], w: Sequence[Valuation]) -> None:
    if len(v) != market.n or len(w) != market.m:
        raise ConfigurationError(
            f"profile has {len(v)} buyers / {len(w)} sellers, market has {market.n} / {market.m}"
        )


def demand_rule(plan: PricingPlan):
    memo = plan._memo

    def rule(valuation: Valuation, available: ItemBundle) -> ItemBundle:
        key = ("demand", valuation, available)
        choice = memo.get(key)
        if choice is None:
            choice = memo[key] = demand_set(valuation, plan.prices, available)
        return choice

    return rule


def run_unit_supply(
    market: TwoSidedMarket,
    plan: PricingPlan,
    v: Sequence[Valuation],
    w: Sequence[Valuation],
    rng,
    strategies: StrategyProfile | None = None,
) -> RunResult:
    if not market.is_unit_supply:
        raise WrongMechanism("the unit-supply mechanism needs every seller to own exactly one item")
    _check_profile(market, v, w)
    buyers = strategies.buyers if strategies else (TRUTHFUL,) * market.n
    sellers = strategies.sellers if strategies else (TRUTHFUL,) * market.m
    state = MechanismRunState()

    on_market: set[int] = set()
    for j, own in enumerate(market.endowment):
        u = rng.random()
        if not own <= plan.high:
            state.demanded.append(EMPTY)
            state.z.append(False)
            state.thresholds.append(0)
            continue
        record = plan.offer(j, own)
        state.thresholds.append(record.q)
        offered = u < record.q
        accepted = offered and sellers[j].accept(w[j], own, record.price)
        state.demanded.append(own)
        state.z.append(accepted)
        state.offers.append(OfferLog(j, own, record.price, offered, accepted))
        if accepted:
            on_market |= own

    rule = demand_rule(plan)
    available = frozenset(on_market)
    bought = []
    for i in range(market.n):
        state.available.append(available)
        choice = frozenset(buyers[i].request(rule, v[i], available)) & available
        state.requests.append(choice)
        bought.append(choice)
        available = available - choice
    state.available.append(available)

    taken = frozenset().union(*bought) if bought else EMPTY
    sold = [own & taken for own in market.endowment]
    buyer_payments, seller_payments = _payments(plan, bought, sold)
    outcome = Outcome(
        tuple(bought),
        tuple(own - taken for own in market.endowment),
        buyer_payments,
        seller_payments,
    )
    return RunResult(outcome, state)


def buyer_expected_utility(
    v: Valuation, items: ItemBundle, plan: PricingPlan, seller_of: Sequence[int]
) -> Number:
    """Expected utility of requesting ``items`` when each seller delivers w.p. 1/2.

    Sellers deliver independently and all-or-nothing; the buyer pays only for
    what is delivered.  Exact: enumerates the 2^t delivery patterns over the t
    sellers involved.
    """
    items = frozenset(items)
    if not items:
        return 0
    stray = items - plan.high
    if stray:
        raise ConfigurationError(f"items {sorted(stray)} are not tradable")
    groups: dict[int, int] = {}
    for item in items:
        groups[seller_of[item]] = groups.get(seller_of[item], 0) | 1 << item
    masks = list(groups.values())
    t = len(masks)
    if t > SELLER_PATTERN_GUARD:
        raise InstanceTooLarge(f"{t} sellers involved, guard is {SELLER_PATTERN_GUARD}")
    exact = all(is_exact(p) for p in plan.prices.values()) and all(
        is_exact(x) for c in v.clauses for x in c
    )
    weight = Fraction(1, 2**t) if exact else 0.5**t
    prices = plan.prices
    total = 0
    for pattern in product((0, 1), repeat=t):
        got = 0
        for bit, mask in zip(pattern, masks):
            if bit:
                got |= mask
        if not got:
            continue
        price = 0
        rest = got
        item = 0
        while rest:
            if rest & 1:
                price = price + prices[item]
            rest >>= 1
            item += 1
        total = total + (v.value_of_mask(got) - price)
    return total * weight


def expected_utility_rule(plan: PricingPlan, seller_of: Sequence[int]):
    memo = plan._memo

    def rule(valuation: Valuation, available: ItemBundle) -> ItemBundle:
        key = ("expected", valuation, available)
        choice = memo.get(key)
        if choice is not None:
            return choice
        if len(available) > BUNDLE_GUARD:
            raise InstanceTooLarge(
                f"{len(available)} available items exceed the bundle guard {BUNDLE_GUARD}",
                hint="reduce the number of high-welfare items",
            )
        best, best_value = EMPTY, 0
        for candidate in subsets_in_order(available):
            value = buyer_expected_utility(valuation, candidate, plan, seller_of)
            if greater(value, best_value):
                best, best_value = candidate, value
        memo[key] = best
        return best

    return rule


def per_item_rule(plan: PricingPlan):
    def rule(valuation: Valuation, available: ItemBundle) -> ItemBundle:
        return frozenset(
            item for item in available if greater(valuation.item_value(item), plan.prices[item])
        )

    return rule


def _run_buyers_first(market, plan, v, w, rng, strategies, rule) -> RunResult:
    _check_profile(market, v, w)
    if not market.sellers_additive:
        raise WrongMechanism("the additive-seller mechanism needs additive seller valuations")
    buyers = strategies.buyers if strategies else (TRUTHFUL,) * market.n
    sellers = strategies.sellers if strategies else (TRUTHFUL,) * market.m
    state = MechanismRunState()

    available = plan.high
    requester: dict[int, int] = {}
    for i in range(market.n):
        state.available.append(available)
        request = frozenset(buyers[i].request(rule, v[i], available)) & available
        state.requests.append(request)
        for item in request:
            requester[item] = i
        available = available - request
    state.available.append(available)
    requested = frozenset(requester)

    bought = [set() for _ in range(market.n)]
    sold = [set() for _ in range(market.m)]
    for j in range(market.m):
        u = rng.random()
        demanded = requested & plan.seller_high[j]
        state.demanded.append(demanded)
        if not demanded:
            state.z.append(u < VACUOUS_Q)
            state.thresholds.append(VACUOUS_Q)
            continue
        record = plan.offer(j, demanded)
        state.thresholds.append(record.q)
        offered = u < record.q
        accepted = offered and sellers[j].accept(w[j], demanded, record.price)
        state.z.append(accepted)
        state.offers.append(OfferLog(j, demanded, record.price, offered, accepted))
        if accepted:
            sold[j] = set(demanded)
            for item in demanded:
                bought[requester[item]].add(item)

    buyer_payments, seller_payments = _payments(plan, bought, sold)
    outcome = Outcome(
        tuple(frozenset(b) for b in bought),
        tuple(own - frozenset(s) for own, s in zip(market.endowment, sold)),
        buyer_payments,
        seller_payments,
    )
    return RunResult(outcome, state)


def run_add(
    market: TwoSidedMarket,
    plan: PricingPlan,
    v: Sequence[Valuation],
    w: Sequence[Valuation],
    rng,
    strategies: StrategyProfile | None = None,
) -> RunResult:
    """Buyers request expected-utility-maximising bundles, then sellers are approached."""
    return _run_buyers_first(market, plan, v, w, rng, strategies, expected_utility_rule(plan, market.owner_of))


def run_add_additive_buyers(
    market: TwoSidedMarket,
    plan: PricingPlan,
    v: Sequence[Valuation],
    w: Sequence[Valuation],
    rng,
    strategies: StrategyProfile | None = None,
) -> RunResult:
    """As :func:`run_add`, but truthful buyers request every item worth strictly more than its price."""
    if not all(vi.is_additive for vi in v) or not market.buyers_additive:
        raise WrongMechanism("the DSIC variant needs additive buyer valuations")
    return _run_buyers_first(market, plan, v, w, rng, strategies, per_item_rule(plan))


_RUNNERS = {UNIT_SUPPLY: run_unit_supply, ADD: run_add, ADD_DSIC: run_add_additive_buyers}


@dataclass(frozen=True)
class PostedPriceMechanism:
    """A mechanism kind bound to a market and its precomputed pricing plan."""

    kind: str
    market: TwoSidedMarket
    plan: PricingPlan

    @classmethod
    def build(
        cls,
        market: TwoSidedMarket,
        kind: str,
        allocator: AllocatorConfig = AllocatorConfig(),
        mode: str | MonteCarlo = EXACT,
    ) -> "PostedPriceMechanism":
        check_compatible(market, kind)
        return cls(kind, market, build_plan(market, allocator, mode))

    @property
    def buyers_first(self) -> bool:
        return self.kind != UNIT_SUPPLY

    def rule(self):
        if self.kind == UNIT_SUPPLY:
            return demand_rule(self.plan)
        if self.kind == ADD:
            return expected_utility_rule(self.plan, self.market.owner_of)
        return per_item_rule(self.plan)

    def run(self, v, w, rng, strategies: StrategyProfile | None = None) -> RunResult:
        return _RUNNERS[self.kind](self.market, self.plan, v, w, rng, strategies)


def check_compatible(market: TwoSidedMarket, kind: str) -> None:
    if kind not in KINDS:
        raise ConfigurationError(f"unknown mechanism {kind!r}; expected one of {KINDS}")
    if kind == UNIT_SUPPLY and not market.is_unit_supply:
        raise WrongMechanism("unit-supply mechanism requires every seller to own exactly one item")
    if kind in (ADD, ADD_DSIC) and not market.sellers_additive:
        raise WrongMechanism("additive-seller mechanisms require additive seller valuations")
    if kind == ADD_DSIC and not market.buyers_additive:
        raise WrongMechanism("add-dsic requires additive buyer valuations")
