"""Posted-price mechanisms for two-sided markets with XOS buyers and additive sellers."""
from .allocator import EXACT, GREEDY, AllocatorConfig, MonteCarlo, allocate, expected_item_contributions
from .errors import (
    ConfigurationError,
    DegenerateSeller,
    DimensionError,
    InstanceTooLarge,
    TwoSidedError,
    WBBViolation,
    WrongMechanism,
)
from .io import dump_market, load_market
from .market import (
    ExchangeMarket,
    ExchangeOutcome,
    Outcome,
    TwoSidedMarket,
    expected_opt,
    optimal_allocation,
    social_welfare,
)
from .mechanisms import PostedPriceMechanism, run_add, run_add_additive_buyers, run_unit_supply, sbb_wrapper
from .pricing import PricingPlan, build_plan
from .stochastic import RngStream, ScriptedRng, ValuationDistribution
from .valuations import Valuation, bundle, demand_set, representative_additive

__all__ = [
    "EXACT",
    "GREEDY",
    "AllocatorConfig",
    "ConfigurationError",
    "DegenerateSeller",
    "DimensionError",
    "ExchangeMarket",
    "ExchangeOutcome",
    "InstanceTooLarge",
    "MonteCarlo",
    "Outcome",
    "PostedPriceMechanism",
    "PricingPlan",
    "RngStream",
    "ScriptedRng",
    "TwoSidedError",
    "TwoSidedMarket",
    "Valuation",
    "ValuationDistribution",
    "WBBViolation",
    "WrongMechanism",
    "allocate",
    "build_plan",
    "bundle",
    "demand_set",
    "dump_market",
    "expected_item_contributions",
    "expected_opt",
    "load_market",
    "optimal_allocation",
    "representative_additive",
    "run_add",
    "run_add_additive_buyers",
    "run_unit_supply",
    "sbb_wrapper",
    "social_welfare",
]
