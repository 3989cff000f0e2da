"""Random small markets with exact rational values, for property tests and suites."""
from __future__ import annotations

import random
from fractions import Fraction

from .market import TwoSidedMarket
from .stochastic import ValuationDistribution
from .valuations import Valuation


def _probs(rng: random.Random, size: int) -> tuple[Fraction, ...]:
    raw = [rng.randint(1, 4) for _ in range(size)]
    return tuple(Fraction(x, sum(raw)) for x in raw)


def _weight(rng: random.Random, top: int) -> Fraction:
    return Fraction(rng.randint(0, 2 * top), 2)


def random_buyer(
    rng: random.Random, k: int, support: int, additive: bool = False, top: int = 10
) -> ValuationDistribution:
    vals = []
    for _ in range(support):
        clauses = 1 if additive else rng.randint(1, 3)
        vals.append(Valuation.xos([[_weight(rng, top) for _ in range(k)] for _ in range(clauses)]))
    return ValuationDistribution(tuple(vals), _probs(rng, support))


def random_seller(rng: random.Random, k: int, items, support: int, top: int = 3) -> ValuationDistribution:
    vals = []
    for _ in range(support):
        vals.append(Valuation.additive([_weight(rng, top) if i in items else 0 for i in range(k)]))
    return ValuationDistribution(tuple(vals), _probs(rng, support))


def random_market(
    rng: random.Random,
    max_buyers: int = 3,
    max_sellers: int = 3,
    max_items: int = 4,
    max_support: int = 3,
    unit_supply: bool = False,
    additive_buyers: bool = False,
    buyer_top: int = 10,
    seller_top: int = 3,
) -> TwoSidedMarket:
    """A market with additive sellers and XOS (or additive) buyers.

    Values are halves of integers, probabilities are small-integer ratios.
    With ``unit_supply`` every seller owns exactly one item.
    """
    if unit_supply:
        k = rng.randint(1, min(max_items, max_sellers))
        m = k
        owner = list(range(k))
    else:
        k = rng.randint(1, max_items)
        m = rng.randint(1, min(max_sellers, k))
        owner = list(range(m)) + [rng.randrange(m) for _ in range(k - m)]
        rng.shuffle(owner)
    endowment = tuple(frozenset(i for i in range(k) if owner[i] == j) for j in range(m))
    n = rng.randint(1, max_buyers)
    buyers = tuple(
        random_buyer(rng, k, rng.randint(1, max_support), additive_buyers, buyer_top) for _ in range(n)
    )
    sellers = tuple(
        random_seller(rng, k, endowment[j], rng.randint(1, max_support), seller_top) for j in range(m)
    )
    return TwoSidedMarket(k, endowment, buyers, sellers)


def market_suite(seed: int, count: int, **kwargs) -> list[TwoSidedMarket]:
    rng = random.Random(seed)
    return [random_market(rng, **kwargs) for _ in range(count)]
