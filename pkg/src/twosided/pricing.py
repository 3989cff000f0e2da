"""High-welfare items, item prices, and seller offer probabilities."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .allocator import EXACT, AllocatorConfig, MonteCarlo, expected_item_contributions
from .errors import ConfigurationError, DegenerateSeller
from .market import TwoSidedMarket
from .numeric import Number, geq, is_exact
from .stochastic import ValuationDistribution, cdf_at, expect
from .valuations import ItemBundle


def classify_items(
    buyer_contributions: Sequence[Number], seller_contributions: Sequence[Number]
) -> tuple[ItemBundle, ItemBundle]:
    """Split items into high welfare (buyer side at least 4x seller side) and the rest."""
    if len(buyer_contributions) != len(seller_contributions):
        raise ConfigurationError("contribution vectors differ in length")
    high = frozenset(
        item
        for item, (b, s) in enumerate(zip(buyer_contributions, seller_contributions))
        if geq(b, 4 * s)
    )
    return high, frozenset(range(len(buyer_contributions))) - high


def _half(x: Number) -> Number:
    return Fraction(x) / 2 if is_exact(x) else x / 2


def offer_probability(dist: ValuationDistribution, items: Iterable[int], price_total: Number) -> Number:
    """Probability of approaching a seller so that offer-and-accept has probability 1/2.

    Returns 0 for an empty bundle (nothing to offer).  Clamped to 1.
    """
    q, _, _ = _offer(dist, frozenset(items), price_total)
    return q


def _offer(dist: ValuationDistribution, items: ItemBundle, price_total: Number):
    if not items:
        return 0, 1, False
    accept = cdf_at(dist, items, price_total)
    if accept == 0:
        raise DegenerateSeller(
            f"seller never accepts {sorted(items)} at total price {price_total}"
        )
    q = 1 / (2 * Fraction(accept)) if is_exact(accept) else 1 / (2 * accept)
    clamped = q > 1
    if clamped:
        q = Fraction(1) if is_exact(q) else 1.0
    return q, accept, clamped


@dataclass(frozen=True)
class OfferRecord:
    seller: int
    items: ItemBundle
    price: Number
    accept_probability: Number
    q: Number
    clamped: bool


@dataclass(frozen=True)
class PricingPlan:
    """Everything the posted-price mechanisms fix before any agent moves.

    ``offers`` memoises ``q_j`` per (seller, demanded bundle) together with
    the acceptance probability it was derived from.
    """

    high: ItemBundle
    low: ItemBundle
    prices: Mapping[int, Number]
    buyer_contributions: tuple[Number, ...]
    seller_contributions: tuple[Number, ...]
    seller_high: tuple[ItemBundle, ...]
    seller_dists: tuple[ValuationDistribution, ...]
    alpha: Number = 1
    offers: dict = field(default_factory=dict, compare=False, repr=False)
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def price_of(self, items: Iterable[int]) -> Number:
        return sum((self.prices[i] for i in items), 0)

    def offer(self, seller: int, items: ItemBundle) -> OfferRecord:
        key = (seller, items)
        record = self.offers.get(key)
        if record is None:
            price = self.price_of(items)
            q, accept, clamped = _offer(self.seller_dists[seller], items, price)
            record = self.offers[key] = OfferRecord(seller, items, price, accept, q, clamped)
        return record

    def q(self, seller: int, items: ItemBundle) -> Number:
        return self.offer(seller, items).q

    @property
    def clamp_hit(self) -> bool:
        return any(r.clamped for r in self.offers.values())


def seller_contributions(market: TwoSidedMarket) -> tuple[Number, ...]:
    """Expected value each seller places on each of her items on its own."""
    out: list[Number] = [0] * market.k
    for j, own in enumerate(market.endowment):
        for item in own:
            out[item] = expect(market.seller_dists[j], lambda w, item=item: w.item_value(item))
    return tuple(out)


def build_plan(
    market: TwoSidedMarket,
    allocator: AllocatorConfig = AllocatorConfig(),
    mode: str | MonteCarlo = EXACT,
) -> PricingPlan:
    buyer_side = expected_item_contributions(allocator, market.buyer_dists, market.k, mode)
    seller_side = seller_contributions(market)
    high, low = classify_items(buyer_side, seller_side)
    prices = {item: _half(buyer_side[item]) for item in sorted(high)}
    seller_high = tuple(own & high for own in market.endowment)
    return PricingPlan(
        high=high,
        low=low,
        prices=prices,
        buyer_contributions=tuple(buyer_side),
        seller_contributions=seller_side,
        seller_high=seller_high,
        seller_dists=market.seller_dists,
        alpha=allocator.alpha,
    )
