"""Canonical-AST record helpers: schema validation and serialization.

A record is a plain dict ready for JSON-lines emission:
{"source_id": str, "label": int?, "root": int, "nodes": [...]}
with nodes {"kind": "ast"|"identifier", "value": str,
            "fields": [[name, [child_index, ...]], ...]}.
"""

from __future__ import annotations

import json


class RecordInvalid(Exception):
    """Record violates a structural invariant of the interchange schema."""


def validate_record(rec: dict) -> None:
    """Tree invariants: single parent per non-root, reachability, leaf rule."""
    nodes = rec.get("nodes")
    root = rec.get("root")
    if not isinstance(nodes, list) or not nodes:
        raise RecordInvalid("nodes must be a non-empty list")
    n = len(nodes)
    if not isinstance(root, int) or not 0 <= root < n:
        raise RecordInvalid(f"root {root!r} out of range")
    parents = [0] * n
    for i, node in enumerate(nodes):
        if node["kind"] not in ("ast", "identifier"):
            raise RecordInvalid(f"node {i}: bad kind {node['kind']!r}")
        if not isinstance(node["value"], str):
            raise RecordInvalid(f"node {i}: value must be a string")
        if node["kind"] == "identifier" and node["fields"]:
            raise RecordInvalid(f"node {i}: identifier with fields")
        for name, children in node["fields"]:
            if not name:
                raise RecordInvalid(f"node {i}: unnamed field")
            if not children:
                raise RecordInvalid(f"node {i}: field {name!r} empty")
            for c in children:
                if not 0 <= c < n:
                    raise RecordInvalid(f"node {i}: child {c} out of range")
                parents[c] += 1
    if parents[root] != 0:
        raise RecordInvalid("root has a parent")
    for i, count in enumerate(parents):
        if i != root and count != 1:
            raise RecordInvalid(f"node {i}: {count} parents")
    seen = {root}
    stack = [root]
    while stack:
        for _, children in nodes[stack.pop()]["fields"]:
            for c in children:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
    if len(seen) != n:
        raise RecordInvalid("unreachable nodes")


def record_to_line(rec: dict) -> str:
    ordered = {"source_id": rec["source_id"]}
    if rec.get("label") is not None:
        ordered["label"] = rec["label"]
    ordered["root"] = rec["root"]
    ordered["nodes"] = rec["nodes"]
    return json.dumps(ordered, ensure_ascii=False, separators=(",", ":"))
