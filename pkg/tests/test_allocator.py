import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twosided.allocator import (
    AllocatorConfig,
    MonteCarlo,
    allocate,
    expected_item_contributions,
    item_contributions,
)
from twosided.errors import ConfigurationError
from twosided.stochastic import ValuationDistribution
from twosided.valuations import Valuation

from conftest import V1, V2
from test_valuations import xos


def brute_force_welfare(v, k):
    best = 0
    for owners in itertools.product(range(len(v) + 1), repeat=k):
        total = sum(v[i](frozenset(l for l in range(k) if owners[l] == i)) for i in range(len(v)))
        best = max(best, total)
    return best


def test_alpha_must_match_mode():
    with pytest.raises(ConfigurationError):
        AllocatorConfig("exact", 2)
    with pytest.raises(ConfigurationError):
        AllocatorConfig("greedy", 1)
    assert AllocatorConfig.greedy().alpha == 2


def test_ex1_contributions():
    d = ValuationDistribution((V1, V2), (Fraction(1, 2), Fraction(1, 2)))
    assert expected_item_contributions(AllocatorConfig(), [d], 2) == (4, 4)


def test_single_buyer_takes_everything():
    assert allocate(AllocatorConfig(), [V1], 2).bundles == (frozenset({0, 1}),)
    assert item_contributions(AllocatorConfig(), [V1], 2) == (7, 2)


def test_no_buyers():
    assert allocate(AllocatorConfig(), [], 3).bundles == ()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda k: st.lists(xos(k=k), min_size=1, max_size=3)))
def test_exact_allocator_is_optimal(v):
    k = v[0].k
    alloc = allocate(AllocatorConfig(), v, k)
    assert alloc.welfare(v) == brute_force_welfare(v, k)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda k: st.lists(xos(k=k), min_size=1, max_size=3)))
def test_contributions_add_up_to_welfare(v):
    k = v[0].k
    for cfg in (AllocatorConfig(), AllocatorConfig.greedy()):
        assert sum(item_contributions(cfg, v, k)) == allocate(cfg, v, k).welfare(v)


def test_monte_carlo_contributions_close_to_exact():
    d = ValuationDistribution((V1, V2), (Fraction(1, 2), Fraction(1, 2)))
    est = expected_item_contributions(AllocatorConfig(), [d], 2, MonteCarlo(20000, 1))
    assert all(abs(x - 4) < 0.1 for x in est)


def test_greedy_gives_items_in_order():
    a = Valuation.additive([3, 0])
    b = Valuation.additive([3, 1])
    assert allocate(AllocatorConfig.greedy(), [a, b], 2).bundles == (frozenset({0}), frozenset({1}))
