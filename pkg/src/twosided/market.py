"""Two-sided and exchange markets, outcomes, and welfare accounting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .allocator import ALLOCATION_GUARD, EXACT, MonteCarlo, assignment_table, best_by_unassigned
from .errors import ConfigurationError, InstanceTooLarge
from .numeric import Number, greater
from .stochastic import (
    ValuationDistribution,
    enumerate_profiles,
    joint_support_size,
    replication_streams,
    sample_profile,
)
from .valuations import ItemBundle, Valuation, bundle_mask

OPT_GUARD = 10**6


def _check_partition(k: int, endowment: Sequence[ItemBundle]) -> None:
    seen: set[int] = set()
    for bundle in endowment:
        for item in bundle:
            if not 0 <= item < k:
                raise ConfigurationError(f"endowed item {item} is outside [0, {k})")
            if item in seen:
                raise ConfigurationError(f"item {item} is endowed twice")
            seen.add(item)
    missing = sorted(set(range(k)) - seen)
    if missing:
        raise ConfigurationError(f"items {missing} are not endowed to anyone")


@dataclass(frozen=True)
class TwoSidedMarket:
    """Buyers with no items facing sellers who jointly own all k items.

    Seller valuations may only put weight on the seller's own items; this is
    enforced here rather than at evaluation time.
    """

    k: int
    endowment: tuple[ItemBundle, ...]
    buyer_dists: tuple[ValuationDistribution, ...]
    seller_dists: tuple[ValuationDistribution, ...]
    owner_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        endowment = tuple(frozenset(b) for b in self.endowment)
        object.__setattr__(self, "endowment", endowment)
        object.__setattr__(self, "buyer_dists", tuple(self.buyer_dists))
        object.__setattr__(self, "seller_dists", tuple(self.seller_dists))
        if len(endowment) != len(self.seller_dists):
            raise ConfigurationError("one endowment bundle per seller is required")
        _check_partition(self.k, endowment)
        for i, d in enumerate(self.buyer_dists):
            if d.k != self.k:
                raise ConfigurationError(f"buyer {i} valuations have k={d.k}, market has k={self.k}")
        for j, (d, own) in enumerate(zip(self.seller_dists, endowment)):
            if d.k != self.k:
                raise ConfigurationError(f"seller {j} valuations have k={d.k}, market has k={self.k}")
            for w in d.support:
                for clause in w.clauses:
                    stray = [item for item, x in enumerate(clause) if x != 0 and item not in own]
                    if stray:
                        raise ConfigurationError(
                            f"seller {j} puts weight on items {stray} outside her endowment"
                        )
        owner = [0] * self.k
        for j, own in enumerate(endowment):
            for item in own:
                owner[item] = j
        object.__setattr__(self, "owner_of", tuple(owner))

    @property
    def n(self) -> int:
        return len(self.buyer_dists)

    @property
    def m(self) -> int:
        return len(self.seller_dists)

    @property
    def is_unit_supply(self) -> bool:
        return all(len(b) == 1 for b in self.endowment)

    @property
    def buyers_additive(self) -> bool:
        return all(v.is_additive for d in self.buyer_dists for v in d.support)

    @property
    def sellers_additive(self) -> bool:
        return all(w.is_additive for d in self.seller_dists for w in d.support)

    def initial_outcome(self) -> "Outcome":
        return Outcome(
            tuple(frozenset() for _ in range(self.n)),
            self.endowment,
            (0,) * self.n,
            (0,) * self.m,
        )


@dataclass(frozen=True)
class ExchangeMarket:
    """Every agent may both buy and sell; endowments partition the items."""

    k: int
    endowment: tuple[ItemBundle, ...]
    dists: tuple[ValuationDistribution, ...]

    def __post_init__(self):
        endowment = tuple(frozenset(b) for b in self.endowment)
        object.__setattr__(self, "endowment", endowment)
        object.__setattr__(self, "dists", tuple(self.dists))
        if len(endowment) != len(self.dists):
            raise ConfigurationError("one endowment bundle per agent is required")
        _check_partition(self.k, endowment)
        for i, d in enumerate(self.dists):
            if d.k != self.k:
                raise ConfigurationError(f"agent {i} valuations have k={d.k}, market has k={self.k}")

    @property
    def n(self) -> int:
        return len(self.dists)

    @classmethod
    def from_two_sided(cls, market: TwoSidedMarket) -> "ExchangeMarket":
        """Buyers first (empty endowments), then sellers."""
        return cls(
            market.k,
            tuple(frozenset() for _ in range(market.n)) + market.endowment,
            market.buyer_dists + market.seller_dists,
        )

    def without(self, agent: int) -> tuple["ExchangeMarket", tuple[int, ...], tuple[int, ...]]:
        """Remove an agent and her items.

        Returns the sub-market plus the original indices of its agents and of
        its items (items are renumbered ``0..k'-1`` in increasing order).
        """
        agents = tuple(a for a in range(self.n) if a != agent)
        items = tuple(sorted(set(range(self.k)) - self.endowment[agent]))
        position = {item: pos for pos, item in enumerate(items)}
        dists = []
        for a in agents:
            d = self.dists[a]
            dists.append(ValuationDistribution(tuple(v.project(items) for v in d.support), d.probs))
        endowment = tuple(frozenset(position[x] for x in self.endowment[a]) for a in agents)
        return ExchangeMarket(len(items), endowment, tuple(dists)), agents, items


@dataclass(frozen=True)
class Outcome:
    """Final bundles and payments; a negative seller payment is money received."""

    buyer_bundles: tuple[ItemBundle, ...]
    seller_bundles: tuple[ItemBundle, ...]
    buyer_payments: tuple[Number, ...]
    seller_payments: tuple[Number, ...]

    @property
    def total_payments(self) -> Number:
        return sum(self.buyer_payments, 0) + sum(self.seller_payments, 0)


@dataclass(frozen=True)
class ExchangeOutcome:
    bundles: tuple[ItemBundle, ...]
    payments: tuple[Number, ...]

    @property
    def total_payments(self) -> Number:
        return sum(self.payments, 0)


@dataclass(frozen=True)
class Violation:
    kind: str  # "duplicate", "missing", "out_of_range", "length"
    detail: str
    item: int | None = None

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


class InvalidOutcome(ConfigurationError):
    def __init__(self, violation: Violation):
        super().__init__(str(violation))
        self.violation = violation


def _partition_violation(k: int, bundles: Sequence[ItemBundle]) -> Violation | None:
    seen: set[int] = set()
    for bundle in bundles:
        for item in sorted(bundle):
            if not 0 <= item < k:
                return Violation("out_of_range", f"item {item} outside [0, {k})", item)
            if item in seen:
                return Violation("duplicate", f"item {item} allocated twice", item)
            seen.add(item)
    for item in range(k):
        if item not in seen:
            return Violation("missing", f"item {item} allocated to nobody", item)
    return None


def validate_outcome(market: TwoSidedMarket | ExchangeMarket, out: Outcome | ExchangeOutcome) -> Violation | None:
    """First violation of the partition / length rules, or None if valid."""
    if isinstance(market, ExchangeMarket):
        if len(out.bundles) != market.n or len(out.payments) != market.n:
            return Violation("length", f"expected {market.n} agent bundles and payments")
        return _partition_violation(market.k, out.bundles)
    if len(out.buyer_bundles) != market.n or len(out.buyer_payments) != market.n:
        return Violation("length", f"expected {market.n} buyer bundles and payments")
    if len(out.seller_bundles) != market.m or len(out.seller_payments) != market.m:
        return Violation("length", f"expected {market.m} seller bundles and payments")
    return _partition_violation(market.k, out.buyer_bundles + out.seller_bundles)


def social_welfare(
    market: TwoSidedMarket,
    v: Sequence[Valuation],
    w: Sequence[Valuation],
    out: Outcome,
    *,
    validate: bool = True,
) -> tuple[Number, Number, Number]:
    """``(buyer welfare, seller welfare, total)`` of an outcome."""
    if validate:
        violation = validate_outcome(market, out)
        if violation is not None:
            raise InvalidOutcome(violation)
    sw_b = sum((vi.value_of_mask(bundle_mask(x)) for vi, x in zip(v, out.buyer_bundles)), 0)
    sw_s = sum((wj.value_of_mask(bundle_mask(y)) for wj, y in zip(w, out.seller_bundles)), 0)
    return sw_b, sw_s, sw_b + sw_s


@dataclass(frozen=True)
class OptimalAllocation:
    buyer_vector: tuple[int, ...]  # buyer index per item, n = stays with its seller
    buyer_welfare: Number
    seller_welfare: Number

    @property
    def welfare(self) -> Number:
        return self.buyer_welfare + self.seller_welfare


def optimal_allocation(
    market: TwoSidedMarket, v: Sequence[Valuation], w: Sequence[Valuation]
) -> OptimalAllocation:
    """Welfare-maximising allocation for a realised profile.

    Items either go to a buyer or stay with their own seller (moving an item
    to another seller never helps, by seller locality).  Ties follow the
    allocator: the lexicographically smallest buyer-index vector wins.
    """
    return _optimum(best_by_unassigned(v, market.k), market, w)


def _optimum(by_rest, market: TwoSidedMarket, w: Sequence[Valuation]) -> OptimalAllocation:
    seller_masks = [bundle_mask(b) for b in market.endowment]
    best = None
    for rest, (buyer_welfare, vector) in by_rest.items():
        seller_welfare = 0
        for wj, own in zip(w, seller_masks):
            part = rest & own
            if part:
                seller_welfare = seller_welfare + wj.value_of_mask(part)
        total = buyer_welfare + seller_welfare
        if (
            best is None
            or greater(total, best[0])
            or (not greater(best[0], total) and vector < best[1])
        ):
            best = (total, vector, buyer_welfare, seller_welfare)
    _, vector, buyer_welfare, seller_welfare = best
    return OptimalAllocation(vector, buyer_welfare, seller_welfare)


@dataclass(frozen=True)
class OptValue:
    opt: Number
    opt_buyers: Number
    opt_sellers: Number
    std_error: float = 0.0  # of ``opt``; zero in exact mode


def expected_opt(
    market: TwoSidedMarket, mode: str | MonteCarlo = EXACT, guard: int = OPT_GUARD
) -> OptValue:
    """Expected optimal welfare and its buyer / seller split."""
    if (market.n + 1) ** market.k > ALLOCATION_GUARD:
        raise InstanceTooLarge(
            f"(n+1)^k = {(market.n + 1) ** market.k} assignments per profile exceeds {ALLOCATION_GUARD}",
            hint="reduce k or the number of buyers",
        )
    if mode == EXACT:
        size = joint_support_size(market.buyer_dists + market.seller_dists)
        if size > guard:
            raise InstanceTooLarge(
                f"joint support has {size} profiles, guard is {guard}",
                hint="switch to Monte Carlo OPT (--opt mc:N)",
            )
        opt = opt_b = opt_s = 0
        seller_profiles = list(enumerate_profiles(market.seller_dists, guard))
        for pv, v in enumerate_profiles(market.buyer_dists, guard):
            by_rest = best_by_unassigned(v, market.k)
            for pw, w in seller_profiles:
                best = _optimum(by_rest, market, w)
                prob = pv * pw
                opt += prob * best.welfare
                opt_b += prob * best.buyer_welfare
                opt_s += prob * best.seller_welfare
        return OptValue(opt, opt_b, opt_s)
    if not isinstance(mode, MonteCarlo):
        raise ConfigurationError(f"unknown OPT mode {mode!r}")
    totals, buyers, sellers = [], 0.0, 0.0
    cache: dict = {}
    for rng in replication_streams(mode.seed, 0, mode.runs):
        v = sample_profile(market.buyer_dists, rng)
        w = sample_profile(market.seller_dists, rng)
        by_rest = cache.get(v)
        if by_rest is None:
            by_rest = cache[v] = best_by_unassigned(v, market.k)
        best = _optimum(by_rest, market, w)
        totals.append(float(best.welfare))
        buyers += float(best.buyer_welfare)
        sellers += float(best.seller_welfare)
    n = mode.runs
    mean = sum(totals) / n
    var = sum((x - mean) ** 2 for x in totals) / (n - 1) if n > 1 else 0.0
    return OptValue(mean, buyers / n, sellers / n, math.sqrt(var / n))


def exchange_expected_opt(market: ExchangeMarket, guard: int = OPT_GUARD) -> Number:
    """Exact expected optimum of an exchange market (any agent may hold any item)."""
    n, k = market.n, market.k
    if n == 0:
        return 0
    table = assignment_table(n - 1, k)  # vectors over 0..n-1
    total = 0
    for prob, profile in enumerate_profiles(market.dists, guard):
        best = None
        for _, masks in table:
            welfare = sum((profile[a].value_of_mask(masks[a]) for a in range(n) if masks[a]), 0)
            if best is None or greater(welfare, best):
                best = welfare
        total += prob * best
    return total
