import json
import random
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twosided.cli import main
from twosided.fuzz import random_market
from twosided.io import MarketFileError, dump_market, load_market, market_to_dict, parse_market

from conftest import EX1_PATH


def ex1_dict():
    return json.loads(EX1_PATH.read_text())


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.booleans(), st.booleans())
def test_round_trip(seed, unit, additive):
    market = random_market(random.Random(seed), unit_supply=unit, additive_buyers=additive)
    assert parse_market(json.loads(json.dumps(market_to_dict(market)))) == market


def test_round_trip_through_file(tmp_path, ex1):
    path = tmp_path / "m.json"
    dump_market(ex1, path)
    assert load_market(path) == ex1


def test_probabilities_must_sum_to_one():
    data = ex1_dict()
    data["buyers"][0]["probs"] = ["0.5", "0.6"]
    with pytest.raises(MarketFileError, match="sum to 1.1"):
        parse_market(data)


def test_near_one_probabilities_renormalised():
    data = ex1_dict()
    data["buyers"][0]["probs"] = ["0.5", "0.5000000001"]
    probs = parse_market(data).buyer_dists[0].probs
    assert sum(probs) == 1


def test_schema_errors_carry_pointer():
    data = ex1_dict()
    data["sellers"][1]["items"] = ["one"]
    with pytest.raises(MarketFileError) as err:
        parse_market(data)
    assert err.value.pointer == "/sellers/1/items/0"


def test_partition_and_locality_errors():
    data = ex1_dict()
    data["sellers"][1]["items"] = [0]
    with pytest.raises(MarketFileError, match="twice"):
        parse_market(data)
    data = ex1_dict()
    data["sellers"][0]["support"][0]["clauses"] = [["0", "1"]]
    with pytest.raises(MarketFileError, match="outside"):
        parse_market(data)


def test_empty_buyer_list():
    data = ex1_dict()
    data["buyers"] = []
    market = parse_market(data)
    assert market.n == 0


def test_decimal_values_are_exact():
    data = ex1_dict()
    data["buyers"][0]["support"][1]["clauses"] = [["0.1", "1/3"]]
    v = parse_market(data).buyer_dists[0].support[1]
    assert v.clauses == ((Fraction(1, 10), Fraction(1, 3)),)


def run_cli(*args):
    return main([str(a) for a in args])


def test_cli_ex1_prices(tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("--market", EX1_PATH, "--mechanism", "add", "--runs", 2000, "--seed", 42, "--out", out) == 0
    report = json.loads(out.read_text())
    assert report["plan"]["prices"] == {"0": "2", "1": "2"}
    assert report["passed"] is True


def test_cli_reports_are_byte_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        run_cli("--market", EX1_PATH, "--mechanism", "unit-supply", "--runs", 3000, "--seed", 7,
                "--format", "csv", "--checks", "all", "--out", p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    header = paths[0].read_text().splitlines()[0]
    assert header == "quantity,mean,std_error,target,tolerance,pass"


def test_cli_config_errors(tmp_path):
    data = ex1_dict()
    data["sellers"] = [{"items": [0, 1], "support": [{"clauses": [["0", "0"]]}], "probs": ["1"]}]
    path = tmp_path / "two.json"
    path.write_text(json.dumps(data))
    assert run_cli("--market", path, "--mechanism", "unit-supply") == 2
    assert run_cli("--market", EX1_PATH, "--mechanism", "add-dsic") == 2
    assert run_cli("--market", tmp_path / "missing.json", "--mechanism", "add") == 2
    assert run_cli("--market", EX1_PATH, "--mechanism", "add", "--opt", "mc:x") == 2
    assert run_cli("--market", EX1_PATH, "--mechanism", "add", "--checks", "bogus") == 2


def test_cli_guard_error_has_hint(tmp_path, capsys, monkeypatch):
    from twosided import cli
    from twosided.market import expected_opt

    monkeypatch.setattr(cli, "expected_opt", lambda market, mode: expected_opt(market, mode, guard=0))
    code = main(["--market", str(EX1_PATH), "--mechanism", "add", "--runs", "10"])
    assert code == 2
    assert "mc:N" in capsys.readouterr().err


def test_cli_failure_exit_code(tmp_path, monkeypatch):
    from twosided.verification import harness

    monkeypatch.setattr(harness, "_near", lambda name, value, err, target, tol: harness.Row(name, value, err, "=x", tol, False))
    assert run_cli("--market", EX1_PATH, "--mechanism", "add", "--runs", 100) == 1


def test_cli_monte_carlo_opt(tmp_path):
    out = tmp_path / "r.json"
    assert run_cli("--market", EX1_PATH, "--mechanism", "add", "--runs", 1000, "--opt", "mc:2000", "--out", out) == 0


def test_cli_sbb(tmp_path):
    out = tmp_path / "r.json"
    code = run_cli("--market", EX1_PATH, "--mechanism", "sbb", "--inner", "fixed:1:0.5", "--runs", 2000, "--out", out)
    assert code == 0
    rows = {r["quantity"]: r for r in json.loads(out.read_text())["rows"]}
    assert rows["sbb rate"]["pass"] and rows["unexplained payment rate given surplus"]["pass"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "twosided", "--market", str(EX1_PATH), "--mechanism", "add", "--runs", "500", "--format", "csv"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("quantity,mean")
