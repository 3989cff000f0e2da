"""Finite deviation tests for truthful play.

``DOMINANT`` is exact.  Over every type profile (the deviator's own type
included) and every pattern of seller coins, the deviation never beats
truthful play.  Coins are forced to 0.0 (offered) or 1.0 (not offered), which
covers every branch the run can take.  Buyers who choose before the sellers
move (``add`` and ``add-dsic``) cannot be judged coin by coin, since their
request changes which offers are made; for them the comparison is the exact
expectation over seller types and coins, for every profile of the buyers.

``Bayes`` compares means over paired replications that share streams, one
test per (true type, deviation).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..errors import ConfigurationError
from ..mechanisms.posted import PostedPriceMechanism
from ..mechanisms.strategies import (
    AlwaysAccept,
    AlwaysReject,
    FixedRequest,
    Misreport,
    StrategyProfile,
)
from ..numeric import TOL, Number, is_exact
from ..stochastic import ScriptedRng, enumerate_profiles
from ..valuations import bundle_mask, subsets_in_order
from .replication import AUTO, FixedType, estimate, simulate

BUYER = "buyer"
SELLER = "seller"
DOMINANT = "dominant"

REQUEST_GUARD = 10


@dataclass(frozen=True)
class Bayes:
    runs: int
    seed: int


@dataclass(frozen=True)
class Agent:
    side: str
    index: int

    def __post_init__(self):
        if self.side not in (BUYER, SELLER):
            raise ConfigurationError(f"agent side must be {BUYER!r} or {SELLER!r}")

    def __str__(self) -> str:
        return f"{self.side} {self.index}"


@dataclass(frozen=True)
class Finding:
    deviation: object
    true_type: object
    gain: Number
    std_error: float = 0.0


@dataclass(frozen=True)
class DeviationReport:
    agent: Agent
    scope: str
    max_gain: Number
    min_gain: Number
    worst: Finding | None
    cases: int
    findings: tuple[Finding, ...] = field(default=(), repr=False)

    @property
    def passed(self) -> bool:
        if self.scope == DOMINANT:
            return self.max_gain <= 0 if is_exact(self.max_gain) else self.max_gain <= TOL
        return all(f.gain <= 3 * f.std_error + TOL for f in self.findings)


def default_deviations(mech: PostedPriceMechanism, agent: Agent) -> list:
    """Support misreports, halved and doubled reports, and side-specific flips.

    Buyers also get every fixed request over the tradable items; sellers get
    unconditional accept and reject.
    """
    market = mech.market
    dists = market.buyer_dists if agent.side == BUYER else market.seller_dists
    out: list = []
    for report in dists[agent.index].support:
        out += [Misreport(report), Misreport(report.scaled(Fraction(1, 2))), Misreport(report.scaled(2))]
    if agent.side == BUYER:
        if len(mech.plan.high) > REQUEST_GUARD:
            raise ConfigurationError(f"more than {REQUEST_GUARD} tradable items; pass deviations explicitly")
        out += [FixedRequest(b) for b in subsets_in_order(mech.plan.high)]
    else:
        out += [AlwaysAccept(), AlwaysReject()]
    return out


def _utility(mech, agent: Agent, v, w, outcome) -> Number:
    if agent.side == BUYER:
        i = agent.index
        return v[i].value_of_mask(bundle_mask(outcome.buyer_bundles[i])) - outcome.buyer_payments[i]
    j = agent.index
    return w[j].value_of_mask(bundle_mask(outcome.seller_bundles[j])) - outcome.seller_payments[j]


def _coins(pattern) -> ScriptedRng:
    return ScriptedRng([0.0 if bit else 1.0 for bit in pattern])


def _expected_over_sellers(mech, agent, v, seller_profiles, strategies) -> Number:
    m = mech.market.m
    total = 0
    thresholds = None
    for pw, w in seller_profiles:
        if thresholds is None:
            thresholds = mech.run(v, w, _coins([1] * m), strategies).state.thresholds
        for pattern in itertools.product((1, 0), repeat=m):
            weight = pw
            for bit, q in zip(pattern, thresholds):
                weight = weight * (q if bit else 1 - q)
            if weight == 0:
                continue
            out = mech.run(v, w, _coins(pattern), strategies).outcome
            total = total + weight * _utility(mech, agent, v, w, out)
    return total


def deviation_test(
    mech: PostedPriceMechanism,
    agent: Agent,
    deviations: Sequence | None = None,
    scope: str | Bayes = DOMINANT,
    engine: str = AUTO,
) -> DeviationReport:
    market = mech.market
    if deviations is None:
        deviations = default_deviations(mech, agent)
    truthful = StrategyProfile.truthful(market.n, market.m)
    arms = [
        truthful.with_buyer(agent.index, d) if agent.side == BUYER else truthful.with_seller(agent.index, d)
        for d in deviations
    ]
    if isinstance(scope, Bayes):
        return _bayes(mech, agent, deviations, arms, truthful, scope, engine)
    if scope != DOMINANT:
        raise ConfigurationError(f"unknown scope {scope!r}")

    findings: list[Finding] = []
    cases = 0
    interim = agent.side == BUYER and mech.buyers_first
    if interim:
        seller_profiles = list(enumerate_profiles(market.seller_dists))
        for _, v in enumerate_profiles(market.buyer_dists):
            base = _expected_over_sellers(mech, agent, v, seller_profiles, truthful)
            for dev, arm in zip(deviations, arms):
                gain = _expected_over_sellers(mech, agent, v, seller_profiles, arm) - base
                findings.append(Finding(dev, v[agent.index], gain))
                cases += 1
    else:
        patterns = list(itertools.product((1, 0), repeat=market.m))
        for _, profile in enumerate_profiles(market.buyer_dists + market.seller_dists):
            v, w = profile[: market.n], profile[market.n :]
            own = v[agent.index] if agent.side == BUYER else w[agent.index]
            for pattern in patterns:
                base = _utility(mech, agent, v, w, mech.run(v, w, _coins(pattern), truthful).outcome)
                for dev, arm in zip(deviations, arms):
                    got = _utility(mech, agent, v, w, mech.run(v, w, _coins(pattern), arm).outcome)
                    findings.append(Finding(dev, own, got - base))
                    cases += 1
    return _report(agent, DOMINANT, findings, cases)


def _bayes(mech, agent, deviations, arms, truthful, scope: Bayes, engine) -> DeviationReport:
    if agent.side != BUYER:
        raise ConfigurationError("Bayesian deviation tests are run for buyers")
    market = mech.market
    i = agent.index
    findings: list[Finding] = []
    for true_type in market.buyer_dists[i].support:
        counts = simulate(mech, scope.runs, scope.seed, [truthful, *arms], FixedType(i, true_type), engine)
        for a, dev in enumerate(deviations, start=1):
            est = estimate(counts, lambda recs, a=a: recs[a].buyer_utility[i] - recs[0].buyer_utility[i])
            findings.append(Finding(dev, true_type, est.mean, est.std_error))
    return _report(agent, f"bayes(N={scope.runs}, seed={scope.seed})", findings, len(findings))


def _report(agent, scope, findings, cases) -> DeviationReport:
    if not findings:
        return DeviationReport(agent, scope, 0, 0, None, 0, ())
    worst = max(findings, key=lambda f: f.gain - 3 * f.std_error)
    return DeviationReport(
        agent,
        scope,
        max(f.gain for f in findings),
        min(f.gain for f in findings),
        worst,
        cases,
        tuple(findings),
    )

