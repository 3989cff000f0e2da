from fractions import Fraction
from itertools import chain, combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twosided.errors import ConfigurationError, DimensionError
from twosided.valuations import (
    Valuation,
    bundle,
    bundle_mask,
    demand_set,
    mask_items,
    representative_additive,
    subsets_in_order,
)

from conftest import V1, V2

weights = st.integers(0, 12).map(Fraction)


@st.composite
def xos(draw, k=None):
    k = k if k is not None else draw(st.integers(1, 4))
    clauses = draw(st.lists(st.lists(weights, min_size=k, max_size=k), min_size=1, max_size=3))
    return Valuation.xos(clauses)


def all_subsets(items):
    items = sorted(items)
    return [frozenset(c) for c in chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))]


def test_ex1_values():
    assert V1(bundle()) == 0
    assert V1(bundle(0)) == 8
    assert V1(bundle(1)) == 4
    assert V1(bundle(0, 1)) == 9
    assert V2(bundle(0, 1)) == 7


def test_mask_round_trip():
    assert bundle_mask({0, 3}) == 0b1001
    assert mask_items(0b1001) == (0, 3)


def test_subsets_order_is_cardinality_then_lex():
    assert list(subsets_in_order({2, 0, 1}))[:5] == [bundle(), bundle(0), bundle(1), bundle(2), bundle(0, 1)]


def test_bad_inputs():
    with pytest.raises(DimensionError):
        Valuation.xos([[1, 2], [3]])
    with pytest.raises(ConfigurationError):
        Valuation.additive([-1, 0])
    with pytest.raises(DimensionError):
        V1(bundle(5))


def test_demand_set_missing_price():
    with pytest.raises(ConfigurationError):
        demand_set(V1, {0: 1}, {0, 1})


def test_demand_empty_when_nothing_profitable():
    assert demand_set(V1, {0: 8, 1: 4}, {0, 1}) == bundle()


def test_demand_ex1_unit_supply():
    assert demand_set(V1, {0: 2, 1: 2}, {0, 1}) == bundle(0)
    assert demand_set(V2, {0: 2, 1: 2}, {0, 1}) == bundle(1)


@settings(max_examples=200, deadline=None)
@given(v=xos(k=4), data=st.data())
def test_demand_set_matches_brute_force(v, data):
    prices = data.draw(st.lists(weights, min_size=4, max_size=4))
    available = data.draw(st.sets(st.integers(0, 3)))
    chosen = demand_set(v, prices, available)
    utility = lambda b: v(b) - sum(prices[i] for i in b)
    best = max(utility(b) for b in all_subsets(available))
    assert chosen <= available
    assert utility(chosen) == best


@settings(max_examples=200, deadline=None)
@given(v=xos(), data=st.data())
def test_xos_is_monotone_and_subadditive(v, data):
    a = frozenset(data.draw(st.sets(st.integers(0, v.k - 1))))
    b = frozenset(data.draw(st.sets(st.integers(0, v.k - 1))))
    assert v(a) <= v(a | b)
    assert v(a | b) <= v(a) + v(b)


@settings(max_examples=200, deadline=None)
@given(v=xos(), data=st.data())
def test_representative_is_tight_lower_bound(v, data):
    items = frozenset(data.draw(st.sets(st.integers(0, v.k - 1))))
    clause = representative_additive(v, items)
    assert sum(clause[i] for i in items) == v(items)
    for sub in all_subsets(range(v.k)):
        assert sum(clause[i] for i in sub) <= v(sub)


def test_representative_ties_go_to_lowest_clause():
    v = Valuation.xos([[1, 0], [1, 5]])
    assert representative_additive(v, {0}) == (1, 0)


def test_project_and_scale():
    assert V1.project((1,)).clauses == ((4,), (0,), (2,))
    assert V1.scaled(2)(bundle(0)) == 16
