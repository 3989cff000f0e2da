"""Seeded replications of posted-price mechanisms, aggregated by distinct run.

Replication ``r`` uses ``RngStream(seed, r)``: buyer types, then seller types,
then one coin per seller.  A run is a deterministic function of the drawn
type indices and of which seller coins fell below their thresholds, so the
vector engine draws all uniforms at once, groups replications by that key and
runs the mechanism once per group.  The scalar engine runs every replication
on its own stream.  Both return the same multiset of run records.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ..market import social_welfare
from ..mechanisms.posted import PostedPriceMechanism
from ..mechanisms.strategies import StrategyProfile
from ..numeric import Number, is_exact
from ..stochastic import BLOCK_WIDTH, RngStream, ScriptedRng, leading_draws
from ..valuations import Valuation, bundle_mask
from .budget import DecompositionError, check_sbb, decompose_trades

SCALAR = "scalar"
VECTOR = "vector"
AUTO = "auto"


class RunRecord(NamedTuple):
    sw_b: Number
    sw_s: Number
    buyer_payments: tuple
    seller_payments: tuple
    buyer_utility: tuple  # v_i(X_i) - payment
    seller_gain: tuple  # w_j(Y_j) - payment - w_j(I_j)
    z: tuple  # offered-and-accepted, per seller
    demanded: tuple  # seller faced a nonempty demanded bundle
    sold: tuple  # per item: ended with a buyer
    sbb: bool
    dsbb: bool

    @property
    def sw(self) -> Number:
        return self.sw_b + self.sw_s

    @property
    def total_buyer_payments(self) -> Number:
        return sum(self.buyer_payments, 0)


def make_record(mech: PostedPriceMechanism, v, w, result) -> RunRecord:
    market = mech.market
    out = result.outcome
    sw_b, sw_s, _ = social_welfare(market, v, w, out)
    buyer_utility = tuple(
        vi.value_of_mask(bundle_mask(x)) - p for vi, x, p in zip(v, out.buyer_bundles, out.buyer_payments)
    )
    seller_gain = tuple(
        wj.value_of_mask(bundle_mask(y)) - p - wj.value_of_mask(bundle_mask(own))
        for wj, y, p, own in zip(w, out.seller_bundles, out.seller_payments, market.endowment)
    )
    taken = frozenset().union(*out.buyer_bundles) if out.buyer_bundles else frozenset()
    try:
        decompose_trades(market, out, mech.plan.prices)
        dsbb = True
    except DecompositionError:
        dsbb = False
    return RunRecord(
        sw_b,
        sw_s,
        tuple(out.buyer_payments),
        tuple(out.seller_payments),
        buyer_utility,
        seller_gain,
        tuple(result.state.z),
        tuple(bool(s) for s in result.state.demanded),
        tuple(item in taken for item in range(market.k)),
        check_sbb(out).ok,
        dsbb,
    )


@dataclass(frozen=True)
class FixedType:
    """Pin one buyer's type; her uniform is still consumed."""

    buyer: int
    valuation: Valuation


def _profile(mech, v_idx, w_idx, fixed: FixedType | None):
    market = mech.market
    v = [d.support[i] for d, i in zip(market.buyer_dists, v_idx)]
    if fixed is not None:
        v[fixed.buyer] = fixed.valuation
    w = tuple(d.support[i] for d, i in zip(market.seller_dists, w_idx))
    return tuple(v), w


def simulate(
    mech: PostedPriceMechanism,
    runs: int,
    seed: int,
    arms: Sequence[StrategyProfile | None] = (None,),
    fixed: FixedType | None = None,
    engine: str = AUTO,
) -> Counter:
    """Multiset of per-replication record tuples, one record per arm.

    Every arm replays the same stream, so arms differ only in behaviour.
    """
    market = mech.market
    width = market.n + 2 * market.m
    if engine == AUTO:
        engine = VECTOR if width <= BLOCK_WIDTH else SCALAR
    if engine == SCALAR:
        return _simulate_scalar(mech, runs, seed, arms, fixed)
    return _simulate_vector(mech, runs, seed, arms, fixed)


def _simulate_scalar(mech, runs, seed, arms, fixed) -> Counter:
    market = mech.market
    counts: Counter = Counter()
    for r in range(runs):
        records = []
        for arm in arms:
            rng = RngStream(seed, r)
            v_idx = tuple(d.index_for(rng.random()) for d in market.buyer_dists)
            w_idx = tuple(d.index_for(rng.random()) for d in market.seller_dists)
            v, w = _profile(mech, v_idx, w_idx, fixed)
            records.append(make_record(mech, v, w, mech.run(v, w, rng, arm)))
        counts[tuple(records)] += 1
    return counts


def _double_above(q: Number) -> float:
    """Smallest double ``t`` with ``u < q`` iff ``u < t`` for every double ``u``."""
    t = float(q)
    if is_exact(q) and Fraction(t) < q:
        t = math.nextafter(t, math.inf)
    return t


def _type_indices(dists, draws: np.ndarray) -> np.ndarray:
    cols = [
        np.minimum(np.searchsorted(np.asarray(d._cumulative), draws[:, c], side="right"), len(d) - 1)
        for c, d in enumerate(dists)
    ]
    return np.stack(cols, axis=1) if cols else np.zeros((draws.shape[0], 0), dtype=np.int64)


def _simulate_vector(mech, runs, seed, arms, fixed) -> Counter:
    market = mech.market
    n, m = market.n, market.m
    draws = leading_draws(seed, runs, n + 2 * m)
    idx = np.concatenate(
        [_type_indices(market.buyer_dists, draws[:, :n]), _type_indices(market.seller_dists, draws[:, n : n + m])],
        axis=1,
    )
    coins = draws[:, n + m :]
    combos, combo_of = np.unique(idx, axis=0, return_inverse=True)
    combo_of = combo_of.reshape(-1)
    profiles = [_profile(mech, tuple(row[:n]), tuple(row[n:]), fixed) for row in combos.tolist()]

    weights = 1 << np.arange(m, dtype=np.int64)
    columns = [combo_of.astype(np.int64)]
    for arm in arms:
        thresholds = np.array(
            [
                [_double_above(q) for q in mech.run(v, w, ScriptedRng([0.0] * m), arm).state.thresholds]
                for v, w in profiles
            ],
            dtype=float,
        ).reshape(len(profiles), m)
        bits = (coins < thresholds[combo_of]).astype(np.int64) @ weights if m else np.zeros(runs, dtype=np.int64)
        columns.append(bits)
    keys, tallies = np.unique(np.stack(columns, axis=1), axis=0, return_counts=True)

    counts: Counter = Counter()
    for (combo, *patterns), tally in zip(keys.tolist(), tallies.tolist()):
        v, w = profiles[combo]
        records = tuple(
            make_record(mech, v, w, mech.run(v, w, ScriptedRng([0.0 if p >> j & 1 else 1.0 for j in range(m)]), arm))
            for arm, p in zip(arms, patterns)
        )
        counts[records] += tally
    return counts


@dataclass(frozen=True)
class Estimate:
    mean: Number
    std_error: float
    runs: int


def estimate(counts: Counter, f: Callable) -> Estimate:
    """Mean (exact when every value is rational) and standard error of ``f``."""
    runs = sum(counts.values())
    values = [(f(key), c) for key, c in counts.items()]
    if is_exact(*(x for x, _ in values)):
        mean = Fraction(sum((x * c for x, c in values), 0)) / runs
    else:
        mean = sum(float(x) * c for x, c in values) / runs
    if runs < 2:
        return Estimate(mean, 0.0, runs)
    centre = float(mean)
    var = sum(c * (float(x) - centre) ** 2 for x, c in values) / (runs - 1)
    return Estimate(mean, math.sqrt(var / runs), runs)


def single(counts: Counter) -> Counter:
    """Collapse one-arm record tuples to bare records."""
    out: Counter = Counter()
    for records, c in counts.items():
        out[records[0]] += c
    return out
