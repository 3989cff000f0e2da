import itertools
import random
from fractions import Fraction

import pytest

from twosided.errors import WBBViolation, WrongMechanism
from twosided.fuzz import random_market
from twosided.market import ExchangeMarket, ExchangeOutcome, TwoSidedMarket, social_welfare
from twosided.mechanisms import (
    ADD,
    ADD_DSIC,
    UNIT_SUPPLY,
    AlwaysReject,
    FixedPriceDemo,
    NoTrade,
    PostedPriceMechanism,
    StrategyProfile,
    buyer_expected_utility,
    check_compatible,
    run_add_additive_buyers,
    sbb_wrapper,
)
from twosided.pricing import build_plan
from twosided.stochastic import RngStream, ScriptedRng, ValuationDistribution, enumerate_profiles
from twosided.valuations import Valuation, bundle

from conftest import V1, V2, ZERO

S01, S0, S1 = bundle(0, 1), bundle(0), bundle(1)


def test_expected_utilities_at_computed_prices(ex1):
    plan = build_plan(ex1)
    u = lambda v, b: buyer_expected_utility(v, b, plan, ex1.owner_of)
    assert (u(V1, S0), u(V1, S1), u(V1, S01)) == (3, 1, Fraction(13, 4))
    assert (u(V2, S0), u(V2, S1), u(V2, S01)) == (Fraction(-1, 2), 2, Fraction(3, 2))


def test_expected_utilities_at_doubled_prices(ex1):
    plan = build_plan(ex1)
    doubled = type(plan)(plan.high, plan.low, {0: 4, 1: 4}, plan.buyer_contributions,
                         plan.seller_contributions, plan.seller_high, plan.seller_dists)
    u = lambda b: buyer_expected_utility(V1, b, doubled, ex1.owner_of)
    assert (u(S0), u(S1), u(S01)) == (2, 0, Fraction(5, 4))


def test_add_requests(ex1):
    mech = PostedPriceMechanism.build(ex1, ADD)
    for v, expected in ((V1, S01), (V2, S1)):
        result = mech.run((v,), (ZERO, ZERO), ScriptedRng([0.0, 0.0]))
        assert result.state.requests == [expected]


def test_add_exact_mean_welfare(ex1):
    # each seller delivers with probability 1/2: v1 asks for both, v2 for item 1
    mech = PostedPriceMechanism.build(ex1, ADD)
    total = 0
    for (pv, (v,)) in enumerate_profiles(ex1.buyer_dists):
        thresholds = mech.run((v,), (ZERO, ZERO), ScriptedRng([1.0, 1.0])).state.thresholds
        for bits in itertools.product((0, 1), repeat=2):
            weight = pv
            for b, q in zip(bits, thresholds):
                weight *= q if b else 1 - q
            out = mech.run((v,), (ZERO, ZERO), ScriptedRng([0.0 if b else 1.0 for b in bits])).outcome
            total += weight * social_welfare(ex1, (v,), (ZERO, ZERO), out)[2]
    assert total == Fraction(33, 8)


def test_unit_supply_example_run(ex1):
    mech = PostedPriceMechanism.build(ex1, UNIT_SUPPLY)
    result = mech.run((V1,), (ZERO, ZERO), ScriptedRng([0.0, 0.0]))
    out = result.outcome
    assert out.buyer_bundles == (S0,)
    assert out.buyer_payments == (2,)
    assert out.seller_bundles == (frozenset(), S1)
    assert out.seller_payments == (-2, 0)
    assert result.state.z == [True, True]  # seller 1 accepted but keeps her unsold item
    assert social_welfare(ex1, (V1,), (ZERO, ZERO), out)[2] == 8


def test_rejecting_seller_loses_sale(ex1):
    mech = PostedPriceMechanism.build(ex1, UNIT_SUPPLY)
    profile = StrategyProfile.truthful(1, 2).with_seller(0, AlwaysReject())
    out = mech.run((V1,), (ZERO, ZERO), ScriptedRng([0.0, 0.0]), profile).outcome
    assert out.seller_payments[0] == 0
    assert out.buyer_bundles == (S1,)


@pytest.mark.parametrize("kind", [UNIT_SUPPLY, ADD])
def test_one_uniform_per_seller(ex1, kind):
    mech = PostedPriceMechanism.build(ex1, kind)
    for v in (V1, V2):
        rng = ScriptedRng([0.3, 0.7])
        mech.run((v,), (ZERO, ZERO), rng)
        with pytest.raises(IndexError):
            rng.random()


def test_compatibility_checks(ex1):
    with pytest.raises(WrongMechanism):
        check_compatible(ex1, ADD_DSIC)
    two = TwoSidedMarket(2, ({0, 1},), ex1.buyer_dists, (ValuationDistribution.point(ZERO),))
    with pytest.raises(WrongMechanism):
        PostedPriceMechanism.build(two, UNIT_SUPPLY)


def test_additive_rule_is_strict():
    market = random_market(random.Random(4), additive_buyers=True)
    plan = build_plan(market)
    item = min(plan.high) if plan.high else None
    if item is None:
        pytest.skip("no priced items")
    v = [0] * market.k
    v[item] = plan.prices[item]
    buyers = (Valuation.additive(v),) + tuple(d.support[0] for d in market.buyer_dists[1:])
    sellers = tuple(d.support[0] for d in market.seller_dists)
    result = run_add_additive_buyers(market, plan, buyers, sellers, ScriptedRng([0.0] * market.m))
    assert item not in result.state.requests[0]


def test_additive_variant_rejects_xos(ex1):
    plan = build_plan(ex1)
    with pytest.raises(WrongMechanism):
        run_add_additive_buyers(ex1, plan, (V1,), (ZERO, ZERO), ScriptedRng([0.0, 0.0]))


@pytest.mark.parametrize("seed", range(30))
def test_outcomes_valid_and_balanced(seed):
    rng = random.Random(seed)
    market = random_market(rng, unit_supply=seed % 2 == 0, additive_buyers=seed % 3 == 0)
    kinds = [ADD] + ([UNIT_SUPPLY] if market.is_unit_supply else []) + ([ADD_DSIC] if market.buyers_additive else [])
    for kind in kinds:
        mech = PostedPriceMechanism.build(market, kind)
        for r in range(20):
            stream = RngStream(seed, r)
            v = tuple(d.support[d.index_for(stream.random())] for d in market.buyer_dists)
            w = tuple(d.support[d.index_for(stream.random())] for d in market.seller_dists)
            out = mech.run(v, w, stream).outcome
            assert out.total_payments == 0
            social_welfare(market, v, w, out)  # raises on an invalid allocation


def test_sbb_single_agent_is_degenerate():
    v = Valuation.additive([1])
    m = ExchangeMarket(1, (frozenset({0}),), (ValuationDistribution.point(v),))
    run = sbb_wrapper(m, NoTrade(), (v,), ScriptedRng([0.5]))
    assert run.excluded == 0 and run.outcome.payments == (0,)


def test_sbb_wrapper_routes_surplus(ex1):
    ex = ExchangeMarket.from_two_sided(ex1)
    profile = (V1, ZERO, ZERO)
    rng = ScriptedRng([0.99])  # excludes agent 2, the second seller
    run = sbb_wrapper(ex, FixedPriceDemo(Fraction(1), Fraction(1, 2)), profile, rng)
    assert run.excluded == 2
    assert run.outcome.bundles == (frozenset({0}), frozenset(), frozenset({1}))
    assert run.outcome.payments == (Fraction(3, 2), -1, Fraction(-1, 2))
    assert run.outcome.total_payments == 0


def test_sbb_wrapper_rejects_deficit(ex1):
    def generous(market, valuations, rng):
        return ExchangeOutcome(market.endowment, (-1,) + (0,) * (market.n - 1))

    ex = ExchangeMarket.from_two_sided(ex1)
    with pytest.raises(WBBViolation):
        sbb_wrapper(ex, generous, (V1, ZERO, ZERO), ScriptedRng([0.0]))
