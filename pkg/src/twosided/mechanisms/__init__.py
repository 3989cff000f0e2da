from .posted import (
    ADD,
    ADD_DSIC,
    KINDS,
    UNIT_SUPPLY,
    MechanismRunState,
    OfferLog,
    PostedPriceMechanism,
    RunResult,
    buyer_expected_utility,
    check_compatible,
    run_add,
    run_add_additive_buyers,
    run_unit_supply,
)
from .sbb import FixedPriceDemo, NoTrade, SbbRun, sbb_wrapper
from .strategies import (
    TRUTHFUL,
    AlwaysAccept,
    AlwaysReject,
    FixedRequest,
    Misreport,
    StrategyProfile,
    Truthful,
)

__all__ = [
    "ADD",
    "ADD_DSIC",
    "KINDS",
    "UNIT_SUPPLY",
    "AlwaysAccept",
    "AlwaysReject",
    "FixedPriceDemo",
    "FixedRequest",
    "MechanismRunState",
    "Misreport",
    "NoTrade",
    "OfferLog",
    "PostedPriceMechanism",
    "RunResult",
    "SbbRun",
    "StrategyProfile",
    "TRUTHFUL",
    "Truthful",
    "buyer_expected_utility",
    "check_compatible",
    "run_add",
    "run_add_additive_buyers",
    "run_unit_supply",
    "sbb_wrapper",
]
