import io
import json
import subprocess
import sys

import pytest

from corrheight.algebraic import INF, AlgebraicNumber
from corrheight.cli import parse_branch, parse_height_bound, parse_point, run
from corrheight.errors import ParseError
from corrheight.pathspace import All, ByIndex, RandomWeighted
from corrheight.records import SCHEMA, dumps, loads, make_record


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return [loads(line) for line in text.splitlines() if line.strip()]


def test_parse_point():
    assert parse_point("inf") is INF
    assert parse_point("-3/2") == AlgebraicNumber((3, 2))
    a = parse_point("root(x^2 - 2, -1.4)")
    assert a.ints == (-2, 0, 1) and a.approx().real < 0
    b = parse_point("root(x^3 - x + 1, 0.66+0.56i)")
    assert b.degree == 3 and b.approx().imag > 0
    with pytest.raises(ParseError):
        parse_point("root(y^2 - 2, 1)")


def test_parse_branch():
    assert parse_branch("0,1,1", "pad") == ByIndex((0, 1, 1), "pad")
    assert parse_branch("seed:7", "cycle") == RandomWeighted((7,))
    assert isinstance(parse_branch("all", "cycle"), All)
    with pytest.raises(ParseError) as info:
        parse_branch("0,x", "cycle")
    assert info.value.position == 2


def test_parse_height_bound():
    assert parse_height_bound("log(100)") == pytest.approx(4.605170185988092)
    assert parse_height_bound("4.6") == 4.6


def test_canonical_height_record():
    code, out, _ = call("canonical-height", "--corr", "y^2 - x^3 - 1", "--start", "0",
                        "--branch", "0,0,0,0,0,0,0,0", "--format", "json")
    assert code == 0
    (rec,) = records(out)
    assert rec["schema"] == SCHEMA and rec["command"] == "canonical-height"
    assert rec["certified"] is True and rec["result"]["certified"] is True
    assert set(rec["result"]["value"]) == {"mid", "rad"}
    assert rec["inputs"]["corr"] == "y^2 - x^3 - 1"


def test_search_rational_example():
    code, out, _ = call("search-rational", "--corr", "y^2 - x^3 + x - 1", "--height-bound", "4.6",
                        "--depth", "5", "--format", "json")
    assert code == 0
    assert sorted(r["result"]["start"] for r in records(out)) == ["-1", "0", "1"]


def test_validate_rejects_univariate_factor():
    code, out, err = call("validate", "--corr", "x*(y^2-x)", "--format", "json")
    assert code == 2
    assert "univariate factor" in err
    assert records(out)[0]["status"] == "rejected"


def test_parse_error_exit_code_and_caret():
    code, out, err = call("validate", "--corr", "y^2 - x^^3")
    assert code == 1 and out == ""
    assert "column 9" in err and "^" in err


def test_budget_exhaustion_exit_code_keeps_partial_results():
    code, out, err = call("search-repetitive", "--corr", "y^2 - x^3 - 1", "--height-bound", "log(10)",
                          "--depth", "6", "--node-budget", "5", "--format", "json")
    assert code == 3
    recs = records(out)
    assert recs[-1]["status"] == "exhausted"


def test_depth_budget_exit_code():
    code, out, err = call("canonical-height", "--corr", "y^2 - x^3 - 1", "--depth", "40")
    assert code == 3 and "budget" in err


def test_hminmax_truncation_exit_code():
    code, out, _ = call("hminmax", "--corr", "y^2 - x^3 - 1", "--node-budget", "3", "--format", "json")
    assert code == 3
    first = records(out)[0]
    assert first["status"] == "truncated" and first["result"]["truncated"] is True


def test_successors_records_and_text():
    code, out, _ = call("successors", "--corr", "y^2 - x^3 + x - 1", "--start", "3", "--format", "json")
    assert code == 0
    assert sorted(r["result"]["point"] for r in records(out)) == ["-5", "5"]
    code, out, _ = call("successors", "--corr", "y^2 - x^3 + x - 1", "--start", "inf")
    assert "point: inf" in out and "multiplicity: 2" in out


@pytest.mark.parametrize("argv", [
    ["validate", "--corr", "y^2 - x^3 - 1"],
    ["path", "--corr", "y^2 - x^3 - 1", "--branch", "all", "--depth", "2"],
    ["hminmax", "--corr", "y - x^2", "--start", "2"],
    ["expected-height", "--corr", "y^2 - x^3 - 1", "--samples", "40", "--depth", "4", "--relation"],
    ["local-heights", "--corr", "2*y^2 - x^3 - 1", "--start", "3", "--branch", "1", "--depth", "3"],
    ["local-global", "--corr", "y^2 - x^3 - 1", "--branch", "1", "--depth", "5"],
    ["search-repetitive", "--corr", "y^2 - x^3 + x - 1", "--depth", "3"],
    ["specialize", "--family", "y^2 - x^3 - t", "--t-values", "2,4", "--depth", "4"],
])
def test_every_command_is_byte_deterministic(argv):
    first = call(*argv, "--format", "json")
    second = call(*argv, "--format", "json")
    assert first[0] == 0
    assert first == second
    for rec in records(first[1]):
        assert rec["schema"] == SCHEMA


def test_text_output_for_specialize_is_a_table():
    code, out, _ = call("specialize", "--family", "y^2 - x^3 - t", "--t-values", "2,4", "--depth", "4")
    assert code == 0
    assert out.splitlines()[0].split("\t")[:2] == ["t", "h(t)"]


def test_records_never_contain_bare_floats():
    rec = make_record("x", {"a": 1.5}, {"v": 0.25, "nested": [{"w": 2.0}]}, True)

    def walk(v):
        if isinstance(v, dict):
            if set(v) == {"mid", "rad"}:
                return
            for x in v.values():
                walk(x)
        elif isinstance(v, list):
            for x in v:
                walk(x)
        else:
            assert not isinstance(v, float)

    walk(rec["result"])
    assert json.loads(dumps(rec)) == rec


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "corrheight", "validate", "--corr", "x*(y^2-x)"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
