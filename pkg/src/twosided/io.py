"""Market files: JSON with values as decimal (or ``p/q``) strings, parsed exactly.

Two-sided markets::

    {"k": 2,
     "buyers":  [{"support": [{"clauses": [["0", "4"], ["8", "0"]]}], "probs": ["1"]}],
     "sellers": [{"items": [0], "support": [{"clauses": [["1", "0"]]}], "probs": ["1"]}, ...]}

Exchange markets use ``"agents"`` (each with ``"items"``) instead of buyers
and sellers.  A valuation may carry ``"kind": "additive"``; otherwise it is
read as XOS.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import jsonschema

from .errors import ConfigurationError
from .market import ExchangeMarket, TwoSidedMarket
from .numeric import format_number, to_number
from .stochastic import ValuationDistribution
from .valuations import ADDITIVE, XOS, Valuation

PROB_TOLERANCE = Fraction(1, 10**9)

_NUMBER = {
    "oneOf": [
        {"type": "string", "pattern": r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)(/\d+)?\s*$"},
        {"type": "number"},
    ]
}
_VALUATION = {
    "type": "object",
    "required": ["clauses"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": [ADDITIVE, XOS]},
        "clauses": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _NUMBER}},
    },
}
_DIST = {
    "support": {"type": "array", "minItems": 1, "items": _VALUATION},
    "probs": {"type": "array", "minItems": 1, "items": _NUMBER},
}
_ITEMS = {"type": "array", "items": {"type": "integer", "minimum": 0}}
SCHEMA = {
    "type": "object",
    "required": ["k"],
    "properties": {
        "k": {"type": "integer", "minimum": 0},
        "buyers": {
            "type": "array",
            "items": {"type": "object", "required": ["support", "probs"], "additionalProperties": False, "properties": _DIST},
        },
        "sellers": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["items", "support", "probs"],
                "additionalProperties": False,
                "properties": {"items": _ITEMS, **_DIST},
            },
        },
        "agents": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["items", "support", "probs"],
                "additionalProperties": False,
                "properties": {"items": _ITEMS, **_DIST},
            },
        },
    },
    "oneOf": [{"required": ["buyers", "sellers"], "not": {"required": ["agents"]}}, {"required": ["agents"]}],
}


class MarketFileError(ConfigurationError):
    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def _valuation(raw: dict, k: int, pointer: str) -> Valuation:
    clauses = [[to_number(x) for x in c] for c in raw["clauses"]]
    if any(len(c) != k for c in clauses):
        raise MarketFileError(f"every clause needs {k} weights", pointer + "/clauses")
    kind = raw.get("kind", XOS)
    try:
        return Valuation(tuple(tuple(c) for c in clauses), kind)
    except ConfigurationError as exc:
        raise MarketFileError(str(exc), pointer) from exc


def _distribution(raw: dict, k: int, pointer: str) -> ValuationDistribution:
    support = [_valuation(v, k, f"{pointer}/support/{i}") for i, v in enumerate(raw["support"])]
    probs = [to_number(p) for p in raw["probs"]]
    if len(probs) != len(support):
        raise MarketFileError("support and probs differ in length", pointer + "/probs")
    if any(p <= 0 for p in probs):
        raise MarketFileError("probabilities must be positive", pointer + "/probs")
    total = sum(probs, Fraction(0))
    if abs(total - 1) > PROB_TOLERANCE:
        raise MarketFileError(f"probabilities sum to {format_number(total)}", pointer + "/probs")
    if total != 1:
        probs = [p / total for p in probs]
    return ValuationDistribution(tuple(support), tuple(probs))


def parse_market(data: dict) -> TwoSidedMarket | ExchangeMarket:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        pointer = "".join(f"/{p}" for p in exc.absolute_path)
        raise MarketFileError(exc.message, pointer) from None
    k = data["k"]
    try:
        if "agents" in data:
            agents = data["agents"]
            return ExchangeMarket(
                k,
                tuple(frozenset(a["items"]) for a in agents),
                tuple(_distribution(a, k, f"/agents/{i}") for i, a in enumerate(agents)),
            )
        return TwoSidedMarket(
            k,
            tuple(frozenset(s["items"]) for s in data["sellers"]),
            tuple(_distribution(b, k, f"/buyers/{i}") for i, b in enumerate(data["buyers"])),
            tuple(_distribution(s, k, f"/sellers/{j}") for j, s in enumerate(data["sellers"])),
        )
    except MarketFileError:
        raise
    except ConfigurationError as exc:
        raise MarketFileError(str(exc)) from exc


def load_market(path: str | Path) -> TwoSidedMarket | ExchangeMarket:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise MarketFileError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise MarketFileError(f"invalid JSON: {exc}") from None
    return parse_market(data)


def _dump_valuation(v: Valuation) -> dict:
    out: dict = {"clauses": [[format_number(x) for x in c] for c in v.clauses]}
    if v.kind == ADDITIVE:
        out = {"kind": ADDITIVE, **out}
    return out


def _dump_dist(d: ValuationDistribution) -> dict:
    return {"support": [_dump_valuation(v) for v in d.support], "probs": [format_number(p) for p in d.probs]}


def market_to_dict(market: TwoSidedMarket | ExchangeMarket) -> dict:
    if isinstance(market, ExchangeMarket):
        return {
            "k": market.k,
            "agents": [{"items": sorted(own), **_dump_dist(d)} for own, d in zip(market.endowment, market.dists)],
        }
    return {
        "k": market.k,
        "buyers": [_dump_dist(d) for d in market.buyer_dists],
        "sellers": [{"items": sorted(own), **_dump_dist(d)} for own, d in zip(market.endowment, market.seller_dists)],
    }


def dump_market(market: TwoSidedMarket | ExchangeMarket, path: str | Path) -> None:
    Path(path).write_text(json.dumps(market_to_dict(market), indent=2) + "\n")
