"""Agent behaviour models used to drive mechanism runs.

A buyer strategy turns the mechanism's truthful choice rule, her true
valuation, and the available items into a request.  A seller strategy decides
whether to accept an offered payment for a bundle.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from ..numeric import Number, leq
from ..valuations import ItemBundle, Valuation

Rule = Callable[[Valuation, ItemBundle], ItemBundle]


class Truthful:
    def request(self, rule: Rule, valuation: Valuation, available: ItemBundle) -> ItemBundle:
        return rule(valuation, available)

    def accept(self, valuation: Valuation, items: ItemBundle, payment: Number) -> bool:
        return leq(valuation(items), payment)

    def __repr__(self) -> str:
        return "Truthful()"

    def __eq__(self, other) -> bool:
        return isinstance(other, Truthful)

    def __hash__(self) -> int:
        return hash("truthful")


TRUTHFUL = Truthful()


@dataclass(frozen=True)
class Misreport:
    """Behave exactly as an agent with valuation ``report`` would."""

    report: Valuation

    def request(self, rule: Rule, valuation: Valuation, available: ItemBundle) -> ItemBundle:
        return rule(self.report, available)

    def accept(self, valuation: Valuation, items: ItemBundle, payment: Number) -> bool:
        return leq(self.report(items), payment)


@dataclass(frozen=True)
class FixedRequest:
    """Request a fixed bundle, restricted to what is still available."""

    items: ItemBundle

    def request(self, rule: Rule, valuation: Valuation, available: ItemBundle) -> ItemBundle:
        return self.items & available


class AlwaysAccept:
    def accept(self, valuation, items, payment) -> bool:
        return True

    def __repr__(self) -> str:
        return "AlwaysAccept()"


class AlwaysReject:
    def accept(self, valuation, items, payment) -> bool:
        return False

    def __repr__(self) -> str:
        return "AlwaysReject()"


@dataclass(frozen=True)
class StrategyProfile:
    buyers: tuple
    sellers: tuple

    @classmethod
    def truthful(cls, n: int, m: int) -> "StrategyProfile":
        return cls((TRUTHFUL,) * n, (TRUTHFUL,) * m)

    def with_buyer(self, i: int, strategy) -> "StrategyProfile":
        buyers = list(self.buyers)
        buyers[i] = strategy
        return replace(self, buyers=tuple(buyers))

    def with_seller(self, j: int, strategy) -> "StrategyProfile":
        sellers = list(self.sellers)
        sellers[j] = strategy
        return replace(self, sellers=tuple(sellers))

    @property
    def all_truthful(self) -> bool:
        return all(s == TRUTHFUL for s in self.buyers + self.sellers)

