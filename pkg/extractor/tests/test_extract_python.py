"""Python extraction: exact enumeration, invariants, determinism."""

import json

import pytest

from canast.extract import MAX_IDENTIFIER_LEN, ParseError, extract_ast
from canast.records import record_to_line, validate_record


EXPECTED_A_EQ_1 = {
    "root": 0,
    "nodes": [
        {"kind": "ast", "value": "Module", "fields": [["body", [1]]]},
        {"kind": "ast", "value": "Assign", "fields": [["targets", [2]], ["value", [5]]]},
        {"kind": "ast", "value": "Name", "fields": [["id", [3]], ["ctx", [4]]]},
        {"kind": "identifier", "value": "a", "fields": []},
        {"kind": "ast", "value": "Store", "fields": []},
        {"kind": "ast", "value": "Constant", "fields": [["value", [6]]]},
        {"kind": "identifier", "value": "1", "fields": []},
    ],
}


def test_a_eq_1_matches_derived_enumeration():
    rec = extract_ast("a = 1", "python")
    assert rec == EXPECTED_A_EQ_1


def test_empty_program_is_single_module_node():
    rec = extract_ast("", "python")
    assert rec == {"root": 0, "nodes": [{"kind": "ast", "value": "Module", "fields": []}]}


def test_invalid_syntax_raises_parse_error():
    with pytest.raises(ParseError):
        extract_ast("a = (", "python")


def test_extraction_is_deterministic():
    src = "def f(x):\n    return x + 1\nprint(f(2))\n"
    a = extract_ast(src, "python")
    b = extract_ast(src, "python")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_identifier_nodes_are_leaves_and_record_validates():
    src = "for i in range(10):\n    print(i * 2, 'x')\n"
    rec = extract_ast(src, "python")
    rec["source_id"] = "t"
    rec["label"] = 0
    validate_record(rec)
    for node in rec["nodes"]:
        if node["kind"] == "identifier":
            assert node["fields"] == []


def test_long_string_constants_truncate():
    long = "y" * 200
    rec = extract_ast(f"s = '{long}'", "python")
    leaves = [n["value"] for n in rec["nodes"] if n["kind"] == "identifier"]
    assert any(len(v) == MAX_IDENTIFIER_LEN for v in leaves)


def test_none_valued_fields_are_dropped():
    # Assign.type_comment is None and Module.type_ignores is empty
    rec = extract_ast("a = 1", "python")
    for node in rec["nodes"]:
        for name, children in node["fields"]:
            assert children, f"field {name} emitted empty"
    field_names = {name for n in rec["nodes"] for name, _ in n["fields"]}
    assert "type_comment" not in field_names
    assert "type_ignores" not in field_names


def test_record_line_round_trips():
    rec = extract_ast("a = 1", "python")
    rec["source_id"] = "x"
    rec["label"] = 3
    line = record_to_line(rec)
    assert json.loads(line) == rec


def test_unknown_language_rejected():
    with pytest.raises(ValueError):
        extract_ast("a = 1", "ruby")
