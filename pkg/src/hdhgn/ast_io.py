"""Canonical-AST interchange records (JSON-lines).

One record per source file:
{"source_id": str, "label": int?, "root": int,
 "nodes": [{"kind": "ast"|"identifier", "value": str,
            "fields": [[field_name, [child_index, ...]], ...]}, ...]}

Grammar nodes carry their node-type name as `value`; identifier leaves carry
token text and never have fields. Fields that were empty in the source tree
are dropped at emission, so an empty child list here is a producer bug.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import MalformedAst, SchemaError

KIND_AST = "ast"
KIND_IDENTIFIER = "identifier"


@dataclass
class AstNode:
    kind: str
    value: str
    fields: list[tuple[str, list[int]]] = field(default_factory=list)


@dataclass
class CanonicalAst:
    source_id: str
    root: int
    nodes: list[AstNode]
    label: int | None = None


def ast_from_obj(obj: dict) -> CanonicalAst:
    """Parse one decoded JSON object; raises SchemaError on shape problems."""
    if not isinstance(obj, dict):
        raise SchemaError("record must be a JSON object")
    try:
        source_id = obj["source_id"]
        root = obj["root"]
        raw_nodes = obj["nodes"]
    except KeyError as missing:
        raise SchemaError(f"record missing key {missing}") from None
    label = obj.get("label")
    if not isinstance(source_id, str) or not isinstance(root, int):
        raise SchemaError("source_id must be str, root must be int")
    if label is not None and not isinstance(label, int):
        raise SchemaError("label must be int or absent")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise SchemaError("nodes must be a non-empty list")
    nodes = []
    for i, raw in enumerate(raw_nodes):
        if not isinstance(raw, dict):
            raise SchemaError(f"node {i} must be an object")
        kind = raw.get("kind")
        value = raw.get("value")
        fields = raw.get("fields", [])
        if kind not in (KIND_AST, KIND_IDENTIFIER):
            raise SchemaError(f"node {i}: unknown kind {kind!r}")
        if not isinstance(value, str):
            raise SchemaError(f"node {i}: value must be a string")
        parsed_fields = []
        for entry in fields:
            if (
                not isinstance(entry, (list, tuple))
                or len(entry) != 2
                or not isinstance(entry[0], str)
                or not isinstance(entry[1], list)
                or not all(isinstance(c, int) for c in entry[1])
            ):
                raise SchemaError(f"node {i}: malformed field entry {entry!r}")
            parsed_fields.append((entry[0], list(entry[1])))
        nodes.append(AstNode(kind=kind, value=value, fields=parsed_fields))
    return CanonicalAst(source_id=source_id, root=root, nodes=nodes, label=label)


def validate_ast(ast: CanonicalAst) -> None:
    """Check the tree invariants; raises MalformedAst on the first violation."""
    n = len(ast.nodes)
    if not 0 <= ast.root < n:
        raise MalformedAst(f"{ast.source_id}: root {ast.root} out of range")
    parents = [0] * n
    for i, node in enumerate(ast.nodes):
        if node.kind == KIND_IDENTIFIER and node.fields:
            raise MalformedAst(f"{ast.source_id}: identifier node {i} has fields")
        for name, children in node.fields:
            if not name:
                raise MalformedAst(f"{ast.source_id}: node {i} has an unnamed field")
            if not children:
                raise MalformedAst(f"{ast.source_id}: node {i} field {name!r} is empty")
            for c in children:
                if not 0 <= c < n:
                    raise MalformedAst(
                        f"{ast.source_id}: node {i} references {c} (out of range)"
                    )
                parents[c] += 1
    if parents[ast.root] != 0:
        raise MalformedAst(f"{ast.source_id}: root has a parent")
    for i, count in enumerate(parents):
        if i != ast.root and count != 1:
            raise MalformedAst(
                f"{ast.source_id}: node {i} has {count} parents (expected 1)"
            )
    # parent counts alone admit disjoint cycles; require root-reachability
    seen = {ast.root}
    stack = [ast.root]
    while stack:
        for _, children in ast.nodes[stack.pop()].fields:
            for c in children:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
    if len(seen) != n:
        raise MalformedAst(f"{ast.source_id}: {n - len(seen)} nodes unreachable from root")


def ast_to_obj(ast: CanonicalAst) -> dict:
    obj: dict = {"source_id": ast.source_id}
    if ast.label is not None:
        obj["label"] = ast.label
    obj["root"] = ast.root
    obj["nodes"] = [
        {
            "kind": node.kind,
            "value": node.value,
            "fields": [[name, children] for name, children in node.fields],
        }
        for node in ast.nodes
    ]
    return obj


def ast_to_json_line(ast: CanonicalAst) -> str:
    return json.dumps(ast_to_obj(ast), ensure_ascii=False, separators=(",", ":"))


def read_jsonl(path: str | Path, validate: bool = True) -> Iterator[CanonicalAst]:
    """Stream records from a JSON-lines corpus file."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise SchemaError(f"{path}: line {lineno}: invalid JSON ({err.msg})") from None
            try:
                ast = ast_from_obj(obj)
                if validate:
                    validate_ast(ast)
            except (SchemaError, MalformedAst) as err:
                raise type(err)(f"{path}: line {lineno}: {err}") from None
            yield ast


def write_jsonl(path: str | Path, asts: Iterable[CanonicalAst]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for ast in asts:
            fh.write(ast_to_json_line(ast))
            fh.write("\n")
            count += 1
    return count
