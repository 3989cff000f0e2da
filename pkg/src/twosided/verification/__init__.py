from .budget import CheckResult, DecompositionError, Trade, TradeLedger, check_sbb, check_wbb, decompose_trades
from .harness import ALL_CHECKS, HarnessReport, Row, approximation_harness, cover_sellers_gap, payment_identity, sbb_harness
from .incentives import BUYER, DOMINANT, SELLER, Agent, Bayes, DeviationReport, default_deviations, deviation_test
from .ir import IRReport, check_ir, check_ir_exhaustive, check_ir_interim
from .properties import best_requests, halving_holds, surviving_utility
from .replication import Estimate, FixedType, RunRecord, estimate, simulate, single

__all__ = [
    "ALL_CHECKS",
    "BUYER",
    "DOMINANT",
    "SELLER",
    "Agent",
    "Bayes",
    "CheckResult",
    "DecompositionError",
    "DeviationReport",
    "Estimate",
    "FixedType",
    "HarnessReport",
    "IRReport",
    "Row",
    "RunRecord",
    "Trade",
    "TradeLedger",
    "approximation_harness",
    "best_requests",
    "check_ir",
    "check_ir_exhaustive",
    "check_ir_interim",
    "check_sbb",
    "check_wbb",
    "cover_sellers_gap",
    "decompose_trades",
    "default_deviations",
    "deviation_test",
    "estimate",
    "halving_holds",
    "payment_identity",
    "sbb_harness",
    "simulate",
    "single",
    "surviving_utility",
]
