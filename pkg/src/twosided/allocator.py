"""Buyer-side allocation algorithm and per-item welfare contributions.

The exact allocator enumerates every assignment of items to buyers (or to
nobody) and keeps the lexicographically smallest welfare-maximising
assignment vector.  "Nobody" is encoded as ``n`` so that, among equally good
assignments, giving an item to a buyer beats leaving it out.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .errors import ConfigurationError, DimensionError, InstanceTooLarge
from .numeric import Number, greater
from .stochastic import ValuationDistribution, enumerate_profiles, replication_streams, sample_profile
from .valuations import ItemBundle, Valuation, bundle_mask, mask_items, representative_additive

EXACT = "exact"
GREEDY = "greedy"

ALLOCATION_GUARD = 10**7


@dataclass(frozen=True)
class AllocatorConfig:
    mode: str = EXACT
    alpha: Number = 1

    def __post_init__(self):
        if self.mode not in (EXACT, GREEDY):
            raise ConfigurationError(f"unknown allocator mode {self.mode!r}")
        if self.alpha < 1:
            raise ConfigurationError("alpha must be at least 1")
        if (self.mode == EXACT) != (self.alpha == 1):
            raise ConfigurationError("alpha is 1 exactly when the allocator is exact")

    @classmethod
    def greedy(cls, alpha: Number = 2) -> "AllocatorConfig":
        return cls(GREEDY, alpha)


@dataclass(frozen=True)
class BuyerAllocation:
    bundles: tuple[ItemBundle, ...]

    def __post_init__(self):
        seen = set()
        for b in self.bundles:
            if seen & b:
                raise ConfigurationError("buyer bundles overlap")
            seen |= b

    def owner(self, item: int) -> int | None:
        for i, b in enumerate(self.bundles):
            if item in b:
                return i
        return None

    def welfare(self, v: Sequence[Valuation]) -> Number:
        return sum((vi.value_of_mask(bundle_mask(b)) for vi, b in zip(v, self.bundles)), 0)


@lru_cache(maxsize=64)
def assignment_table(n: int, k: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    """Every assignment vector in lexicographic order with its owner masks.

    Entry ``(vector, masks)``: ``vector[l]`` is the buyer of item ``l`` or
    ``n`` for "unassigned"; ``masks[i]`` is buyer ``i``'s bundle mask and
    ``masks[n]`` the unassigned mask.
    """
    size = (n + 1) ** k
    if size > ALLOCATION_GUARD:
        raise InstanceTooLarge(
            f"{size} assignments exceed the exact-allocation guard {ALLOCATION_GUARD}",
            hint="use the greedy allocator or reduce k",
        )
    table = []
    for vector in itertools.product(range(n + 1), repeat=k):
        masks = [0] * (n + 1)
        for item, owner in enumerate(vector):
            masks[owner] |= 1 << item
        table.append((vector, tuple(masks)))
    return tuple(table)


def _check_profile(v: Sequence[Valuation], k: int) -> None:
    for vi in v:
        if vi.k != k:
            raise DimensionError(f"buyer valuation has k={vi.k}, expected {k}")


def best_by_unassigned(v: Sequence[Valuation], k: int) -> dict[int, tuple[Number, tuple[int, ...]]]:
    """For each unassigned-items mask, the best buyer welfare and its vector.

    Among equal welfare the lexicographically smallest vector is kept.  Used
    both by the exact allocator and by the joint buyer/seller optimum.
    """
    _check_profile(v, k)
    n = len(v)
    best: dict[int, tuple[Number, tuple[int, ...]]] = {}
    for vector, masks in assignment_table(n, k):
        welfare = 0
        for i in range(n):
            if masks[i]:
                welfare = welfare + v[i].value_of_mask(masks[i])
        rest = masks[n]
        current = best.get(rest)
        if current is None or greater(welfare, current[0]):
            best[rest] = (welfare, vector)
    return best


def _vector_to_allocation(vector: Sequence[int], n: int) -> BuyerAllocation:
    bundles = [set() for _ in range(n)]
    for item, owner in enumerate(vector):
        if owner < n:
            bundles[owner].add(item)
    return BuyerAllocation(tuple(frozenset(b) for b in bundles))


def _exact(v: Sequence[Valuation], k: int) -> BuyerAllocation:
    n = len(v)
    best_value, best_vector = None, None
    for welfare, vector in best_by_unassigned(v, k).values():
        if (
            best_vector is None
            or greater(welfare, best_value)
            or (not greater(best_value, welfare) and vector < best_vector)
        ):
            best_value, best_vector = welfare, vector
    return _vector_to_allocation(best_vector, n)


def _greedy(v: Sequence[Valuation], k: int) -> BuyerAllocation:
    _check_profile(v, k)
    masks = [0] * len(v)
    for item in range(k):
        best_i, best_gain = None, None
        for i, vi in enumerate(v):
            gain = vi.value_of_mask(masks[i] | 1 << item) - vi.value_of_mask(masks[i])
            if best_gain is None or greater(gain, best_gain):
                best_i, best_gain = i, gain
        if best_i is not None:
            masks[best_i] |= 1 << item
    return BuyerAllocation(tuple(frozenset(mask_items(m)) for m in masks))


def allocate(cfg: AllocatorConfig, v: Sequence[Valuation], k: int) -> BuyerAllocation:
    if not v:
        return BuyerAllocation(())
    if cfg.mode == EXACT:
        return _exact(v, k)
    return _greedy(v, k)


def item_contributions(cfg: AllocatorConfig, v: Sequence[Valuation], k: int) -> tuple[Number, ...]:
    """Each item's share of the allocator's welfare.

    An item held by buyer ``i`` contributes its weight in ``i``'s
    representative clause for her whole bundle; unallocated items give 0.
    """
    return _item_contributions(cfg, tuple(v), k)


@lru_cache(maxsize=4096)
def _item_contributions(cfg: AllocatorConfig, v: tuple[Valuation, ...], k: int) -> tuple[Number, ...]:
    allocation = allocate(cfg, v, k)
    contributions: list[Number] = [0] * k
    for i, items in enumerate(allocation.bundles):
        if not items:
            continue
        clause = representative_additive(v[i], items)
        for item in items:
            contributions[item] = clause[item]
    return tuple(contributions)


@dataclass(frozen=True)
class MonteCarlo:
    runs: int
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigurationError("Monte Carlo needs at least one run")


def expected_item_contributions(
    cfg: AllocatorConfig,
    buyer_dists: Sequence[ValuationDistribution],
    k: int,
    mode: str | MonteCarlo = EXACT,
    guard: int = 10**6,
) -> tuple[Number, ...]:
    if not buyer_dists:
        return (0,) * k
    totals: list[Number] = [0] * k
    if mode == EXACT:
        for prob, v in enumerate_profiles(buyer_dists, guard):
            for item, c in enumerate(item_contributions(cfg, v, k)):
                totals[item] = totals[item] + prob * c
        return tuple(totals)
    if not isinstance(mode, MonteCarlo):
        raise ConfigurationError(f"unknown expectation mode {mode!r}")
    for rng in replication_streams(mode.seed, 0, mode.runs):
        for item, c in enumerate(item_contributions(cfg, sample_profile(buyer_dists, rng), k)):
            totals[item] = totals[item] + c
    return tuple(float(t) / mode.runs for t in totals)
