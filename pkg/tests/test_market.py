import itertools
import random
from fractions import Fraction

import pytest

from twosided.allocator import MonteCarlo
from twosided.errors import ConfigurationError, InstanceTooLarge
from twosided.fuzz import random_market
from twosided.market import (
    ExchangeMarket,
    Outcome,
    TwoSidedMarket,
    exchange_expected_opt,
    expected_opt,
    optimal_allocation,
    social_welfare,
    validate_outcome,
)
from twosided.stochastic import ValuationDistribution, enumerate_profiles
from twosided.valuations import Valuation

from conftest import V1, V2, ZERO


def opt_oracle(market):
    """Expected optimum by trying every owner (any buyer, or the item's seller) per item."""
    total = 0
    for prob, profile in enumerate_profiles(market.buyer_dists + market.seller_dists):
        v, w = profile[: market.n], profile[market.n :]
        best = None
        for owners in itertools.product(range(market.n + 1), repeat=market.k):
            buyers = sum(v[i](frozenset(l for l in range(market.k) if owners[l] == i)) for i in range(market.n))
            sellers = sum(
                w[j](frozenset(l for l in own if owners[l] == market.n)) for j, own in enumerate(market.endowment)
            )
            best = buyers + sellers if best is None else max(best, buyers + sellers)
        total += prob * best
    return total


def test_ex1_shape(ex1):
    assert (ex1.n, ex1.m, ex1.k) == (1, 2, 2)
    assert ex1.is_unit_supply and ex1.sellers_additive and not ex1.buyers_additive


def test_ex1_opt(ex1):
    assert expected_opt(ex1).opt == 8


def test_partition_errors():
    d = ValuationDistribution.point(ZERO)
    with pytest.raises(ConfigurationError, match="twice"):
        TwoSidedMarket(2, ({0}, {0, 1}), (), (d, d))
    with pytest.raises(ConfigurationError, match="not endowed"):
        TwoSidedMarket(2, ({0},), (), (d,))


def test_seller_weight_outside_endowment():
    d = ValuationDistribution.point(Valuation.additive([1, 1]))
    z = ValuationDistribution.point(ZERO)
    with pytest.raises(ConfigurationError, match="outside"):
        TwoSidedMarket(2, ({0}, {1}), (), (d, z))


def test_validate_outcome_kinds(ex1):
    good = ex1.initial_outcome()
    assert validate_outcome(ex1, good) is None
    dup = Outcome((frozenset({0}),), (frozenset({0}), frozenset({1})), (0,), (0, 0))
    assert validate_outcome(ex1, dup).kind == "duplicate"
    missing = Outcome((frozenset(),), (frozenset({0}), frozenset()), (0,), (0, 0))
    assert validate_outcome(ex1, missing).kind == "missing"
    short = Outcome((), (frozenset({0}), frozenset({1})), (), (0, 0))
    assert validate_outcome(ex1, short).kind == "length"


def test_social_welfare_split(ex1):
    out = Outcome((frozenset({0}),), (frozenset(), frozenset({1})), (2,), (-2, 0))
    assert social_welfare(ex1, (V1,), (ZERO, ZERO), out) == (8, 0, 8)


def test_optimal_allocation_keeps_valuable_items_with_seller():
    w = Valuation.additive([5, 0])
    m = TwoSidedMarket(
        2,
        ({0}, {1}),
        (ValuationDistribution.point(V2),),
        (ValuationDistribution.point(w), ValuationDistribution.point(ZERO)),
    )
    best = optimal_allocation(m, (V2,), (w, ZERO))
    assert best.buyer_vector == (1, 0)
    assert best.welfare == 11


@pytest.mark.parametrize("seed", range(25))
def test_expected_opt_matches_oracle(seed):
    market = random_market(random.Random(seed))
    opt = expected_opt(market)
    assert opt.opt == opt_oracle(market)
    assert opt.opt_buyers + opt.opt_sellers == opt.opt


def test_monte_carlo_opt_close(ex1):
    mc = expected_opt(ex1, MonteCarlo(20000, 3))
    assert abs(mc.opt - 8) <= 4 * mc.std_error + 1e-9


def test_opt_guard_hint(ex1):
    with pytest.raises(InstanceTooLarge) as err:
        expected_opt(ex1, guard=1)
    assert "mc:N" in err.value.hint


def test_exchange_without_renumbers(ex1):
    ex = ExchangeMarket.from_two_sided(ex1)
    assert ex.endowment == (frozenset(), frozenset({0}), frozenset({1}))
    sub, agents, items = ex.without(1)
    assert agents == (0, 2) and items == (1,)
    assert sub.endowment == (frozenset(), frozenset({0}))
    assert exchange_expected_opt(ex) == 8
