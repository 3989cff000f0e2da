"""Additive and XOS valuation functions over item bundles.

A valuation is stored as an explicit list of additive clauses; its value on a
bundle is the best clause sum.  Bundles are ``frozenset`` of 0-based item
indices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ConfigurationError, DimensionError, InstanceTooLarge
from .numeric import Number, greater

ItemBundle = frozenset

ADDITIVE = "additive"
XOS = "xos"

DEMAND_GUARD = 20


def bundle(*items: int) -> ItemBundle:
    return frozenset(items)


def bundle_mask(items: Iterable[int]) -> int:
    mask = 0
    for item in items:
        mask |= 1 << item
    return mask


def mask_items(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def subsets_in_order(items: Iterable[int]) -> Iterator[ItemBundle]:
    """All subsets ordered by cardinality, then lexicographically."""
    ordered = sorted(items)
    for size in range(len(ordered) + 1):
        for combo in combinations(ordered, size):
            yield frozenset(combo)


@dataclass(frozen=True)
class Valuation:
    """Monotone, normalized valuation given by its additive clauses.

    An additive valuation has exactly one clause.  Valuations are immutable
    and hashable; evaluation results are memoised per bundle.
    """

    clauses: tuple[tuple[Number, ...], ...]
    kind: str = XOS
    _hash: int = field(init=False, repr=False, compare=False)
    _memo: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clauses = tuple(tuple(c) for c in self.clauses)
        if self.kind not in (ADDITIVE, XOS):
            raise ConfigurationError(f"unknown valuation kind {self.kind!r}")
        if not clauses:
            raise ConfigurationError("a valuation needs at least one clause")
        k = len(clauses[0])
        for clause in clauses:
            if len(clause) != k:
                raise DimensionError("all clauses must have the same length")
            if any(w < 0 for w in clause):
                raise ConfigurationError("clause weights must be nonnegative")
        if self.kind == ADDITIVE and len(clauses) != 1:
            raise ConfigurationError("an additive valuation has exactly one clause")
        object.__setattr__(self, "clauses", clauses)
        object.__setattr__(self, "_hash", hash((self.kind, clauses)))
        object.__setattr__(self, "_memo", {})

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def additive(cls, weights: Sequence[Number]) -> "Valuation":
        return cls((tuple(weights),), ADDITIVE)

    @classmethod
    def xos(cls, clauses: Sequence[Sequence[Number]]) -> "Valuation":
        return cls(tuple(tuple(c) for c in clauses), XOS)

    @property
    def k(self) -> int:
        return len(self.clauses[0])

    @property
    def is_additive(self) -> bool:
        return self.kind == ADDITIVE or len(self.clauses) == 1

    def item_value(self, item: int) -> Number:
        return self.value_of_mask(1 << item)

    def value_of_mask(self, mask: int) -> Number:
        try:
            return self._memo[mask]
        except KeyError:
            pass
        if mask >> self.k:
            raise DimensionError(f"bundle mask {mask:b} exceeds k={self.k}")
        items = mask_items(mask)
        value = max(sum((c[i] for i in items), 0) for c in self.clauses)
        self._memo[mask] = value
        return value

    def __call__(self, items: Iterable[int]) -> Number:
        return evaluate(self, items)

    def scaled(self, factor: Number) -> "Valuation":
        return Valuation(tuple(tuple(w * factor for w in c) for c in self.clauses), self.kind)

    def project(self, items: Sequence[int]) -> "Valuation":
        """Keep only the listed item columns, in the given order."""
        return Valuation(tuple(tuple(c[i] for i in items) for c in self.clauses), self.kind)


def _check_items(v: Valuation, items: Iterable[int]) -> int:
    mask = 0
    for item in items:
        if not 0 <= item < v.k:
            raise DimensionError(f"item {item} out of range for k={v.k}")
        mask |= 1 << item
    return mask


def evaluate(v: Valuation, items: Iterable[int]) -> Number:
    """Value of a bundle: the maximum clause sum over its items."""
    return v.value_of_mask(_check_items(v, items))


def bundle_price(prices: Mapping[int, Number] | Sequence[Number], items: Iterable[int]) -> Number:
    return sum((prices[i] for i in items), 0)


def demand_set(
    v: Valuation,
    prices: Mapping[int, Number] | Sequence[Number],
    available: Iterable[int],
) -> ItemBundle:
    """A utility-maximising bundle among the available items.

    Ties go to the first bundle in (cardinality, lexicographic) order, so the
    empty bundle wins whenever nothing gives strictly positive utility.
    """
    available = sorted(set(available))
    _check_items(v, available)
    for item in available:
        try:
            prices[item]
        except (KeyError, IndexError):
            raise ConfigurationError(f"no price for available item {item}") from None
    if len(available) > DEMAND_GUARD:
        raise InstanceTooLarge(
            f"demand enumeration over {len(available)} items exceeds guard {DEMAND_GUARD}",
            hint="reduce the number of items",
        )
    best = frozenset()
    best_utility = 0
    for candidate in subsets_in_order(available):
        utility = v.value_of_mask(bundle_mask(candidate)) - bundle_price(prices, candidate)
        if greater(utility, best_utility):
            best, best_utility = candidate, utility
    return best


def representative_index(v: Valuation, items: Iterable[int]) -> int:
    mask = _check_items(v, items)
    chosen = mask_items(mask)
    best_index, best_value = 0, None
    for index, clause in enumerate(v.clauses):
        value = sum((clause[i] for i in chosen), 0)
        if best_value is None or greater(value, best_value):
            best_index, best_value = index, value
    return best_index


def representative_additive(v: Valuation, items: Iterable[int]) -> tuple[Number, ...]:
    """Clause that attains ``v(items)``; the lowest index wins ties.

    The returned weight vector is an additive lower bound on ``v`` that is
    tight on ``items``.
    """
    return v.clauses[representative_index(v, items)]
