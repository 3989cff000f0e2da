"""Exact checks that need no sampling."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from typing import Mapping, Sequence

from ..numeric import Number, greater
from ..valuations import ItemBundle, Valuation


def surviving_utility(v: Valuation, groups: Sequence[ItemBundle], prices: Mapping[int, Number]) -> Number:
    """Expected utility when each group independently survives with probability 1/2.

    Only surviving items are paid for.  Exact enumeration of all ``2^t``
    survival patterns.
    """
    total = 0
    for pattern in product((False, True), repeat=len(groups)):
        kept = frozenset().union(*(g for g, keep in zip(groups, pattern) if keep))
        total = total + v(kept) - sum((prices[i] for i in kept), 0)
    return Fraction(total) / 2 ** len(groups)


def halving_holds(v: Valuation, groups: Sequence[ItemBundle], prices: Mapping[int, Number]) -> tuple[bool, Number, Number]:
    """``(holds, expected surviving utility, half the full-bundle utility)``."""
    full = frozenset().union(*groups) if groups else frozenset()
    half = Fraction(v(full) - sum((prices[i] for i in full), 0)) / 2
    expected = surviving_utility(v, groups, prices)
    return expected >= half, expected, half


def best_requests(
    v: Valuation, available: ItemBundle, prices: Mapping[int, Number], seller_of: Sequence[int]
) -> tuple[list[ItemBundle], Number]:
    """Every request maximising expected utility when each seller delivers w.p. 1/2.

    Brute force over all subsets of ``available``; returns the maximisers and
    the maximum.
    """
    items = sorted(available)
    scored = []
    for size in range(len(items) + 1):
        for request in combinations(items, size):
            groups: dict[int, set] = {}
            for item in request:
                groups.setdefault(seller_of[item], set()).add(item)
            scored.append((frozenset(request), surviving_utility(v, [frozenset(g) for g in groups.values()], prices)))
    best = max(u for _, u in scored)
    return [b for b, u in scored if not greater(best, u)], best
