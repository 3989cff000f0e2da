"""Budget balance and decomposition of outcomes into bilateral trades."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from ..errors import ConfigurationError, TwoSidedError
from ..market import ExchangeMarket, ExchangeOutcome, InvalidOutcome, Outcome, TwoSidedMarket, validate_outcome
from ..numeric import TOL, Number, is_exact


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    total: Number
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _payments(out: Outcome | ExchangeOutcome) -> tuple[Number, ...]:
    if isinstance(out, ExchangeOutcome):
        return tuple(out.payments)
    return tuple(out.buyer_payments) + tuple(out.seller_payments)


def check_sbb(out: Outcome | ExchangeOutcome) -> CheckResult:
    """Payments sum to zero: exactly for rationals, within ``TOL`` for floats."""
    payments = _payments(out)
    total = sum(payments, 0)
    ok = total == 0 if is_exact(*payments) else abs(total) <= TOL
    return CheckResult(ok, total, "" if ok else f"payments sum to {total}")


def check_wbb(out: Outcome | ExchangeOutcome) -> CheckResult:
    payments = _payments(out)
    total = sum(payments, 0)
    ok = total >= 0 if is_exact(*payments) else total >= -TOL
    return CheckResult(ok, total, "" if ok else f"payments sum to {total}")


@dataclass(frozen=True)
class Trade:
    item: int
    seller: str
    buyer: str
    amount: Number


@dataclass(frozen=True)
class TradeLedger:
    trades: tuple[Trade, ...]

    def __post_init__(self):
        items = [t.item for t in self.trades]
        if len(items) != len(set(items)):
            raise ConfigurationError("an item may be traded only once")

    def __len__(self) -> int:
        return len(self.trades)


class DecompositionError(TwoSidedError):
    """An agent's payment is not explained by the item trades she took part in."""

    def __init__(self, agent: str, payment: Number, explained: Number | None = None):
        detail = f"payment {payment} of {agent} is not explained by its trades"
        if explained is not None:
            detail += f" (trades account for {explained})"
        super().__init__(detail)
        self.agent = agent
        self.payment = payment
        self.explained = explained


def _layout(market, out):
    """Agent labels, original and final bundles, payments, in agent order."""
    violation = validate_outcome(market, out)
    if violation is not None:
        raise InvalidOutcome(violation)
    if isinstance(market, ExchangeMarket):
        labels = [f"agent {a}" for a in range(market.n)]
        return labels, list(market.endowment), list(out.bundles), list(out.payments)
    labels = [f"buyer {i}" for i in range(market.n)] + [f"seller {j}" for j in range(market.m)]
    start = [frozenset()] * market.n + list(market.endowment)
    end = list(out.buyer_bundles) + list(out.seller_bundles)
    return labels, start, end, list(out.buyer_payments) + list(out.seller_payments)


def decompose_trades(
    market: TwoSidedMarket | ExchangeMarket,
    out: Outcome | ExchangeOutcome,
    prices: Mapping[int, Number] | Sequence[Number] | None = None,
) -> TradeLedger:
    """Explain an outcome as one bilateral trade per moved item.

    Each moved item goes from its original holder to its final holder against
    a transfer.  With ``prices`` the transfer for item ``l`` is ``prices[l]``;
    without them the transfers are solved for exactly.  Agents are checked in
    order (buyers, then sellers) and the first one whose payment cannot be
    matched raises :class:`DecompositionError`.
    """
    labels, start, end, payments = _layout(market, out)
    origin = {item: a for a, b in enumerate(start) for item in b}
    moves = sorted(
        (item, origin[item], a) for a, b in enumerate(end) for item in b if origin[item] != a
    )
    exact = is_exact(*payments) and (prices is None or is_exact(*(prices[m[0]] for m in moves)))

    if prices is not None:
        for a, label in enumerate(labels):
            explained = sum((prices[item] for item, _, to in moves if to == a), 0) - sum(
                (prices[item] for item, frm, _ in moves if frm == a), 0
            )
            gap = payments[a] - explained
            if (gap != 0) if exact else abs(gap) > TOL:
                raise DecompositionError(label, payments[a], explained)
        amounts = [prices[item] for item, _, _ in moves]
    else:
        amounts = _solve_transfers(labels, moves, payments, exact)
    return TradeLedger(
        tuple(Trade(item, labels[frm], labels[to], amt) for (item, frm, to), amt in zip(moves, amounts))
    )


def _solve_transfers(labels, moves, payments, exact) -> list[Number]:
    """Exact elimination for per-item transfers, adding one agent equation at a time."""
    width = len(moves)
    pivots: list[tuple[int, list[Fraction], Fraction]] = []  # (column, row, rhs), reduced
    for a, label in enumerate(labels):
        row = [Fraction(0)] * width
        for col, (_, frm, to) in enumerate(moves):
            if to == a:
                row[col] += 1
            if frm == a:
                row[col] -= 1
        rhs = Fraction(payments[a])
        for col, prow, prhs in pivots:
            factor = row[col]
            if factor:
                row = [x - factor * y for x, y in zip(row, prow)]
                rhs -= factor * prhs
        lead = next((c for c, x in enumerate(row) if x), None)
        if lead is None:
            if rhs != 0 if exact else abs(rhs) > TOL:
                raise DecompositionError(label, payments[a])
            continue
        scale = row[lead]
        row = [x / scale for x in row]
        rhs /= scale
        reduced = []
        for col, prow, prhs in pivots:
            factor = prow[lead]
            if factor:
                prow = [x - factor * y for x, y in zip(prow, row)]
                prhs -= factor * rhs
            reduced.append((col, prow, prhs))
        pivots = reduced + [(lead, row, rhs)]
    amounts = [Fraction(0)] * width  # free transfers set to zero
    for col, _, rhs in pivots:
        amounts[col] = rhs
    if not exact:
        return [float(x) for x in amounts]
    return amounts
