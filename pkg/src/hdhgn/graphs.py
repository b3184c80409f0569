"""Heterogeneous directed hypergraphs built from canonical ASTs.

Every (parent, non-empty field) pair becomes one directed hyperedge typed by
the field name: the children form the tail set and the parent is the single
head node, so the graph is a B-hypergraph by construction. Single-child
fields still become (1-tail) hyperedges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .ast_io import KIND_IDENTIFIER, CanonicalAst
from .errors import MalformedAst


class Hyperedge(NamedTuple):
    edge_type: str
    tails: tuple[int, ...]
    head: int


@dataclass
class HDHGraph:
    nodes: list[tuple[str, str]]  # (kind, value)
    edges: list[Hyperedge]
    label: int | None


def build_hdhg(ast: CanonicalAst) -> HDHGraph:
    """Map a canonical AST onto its hypergraph; node order is preserved."""
    n = len(ast.nodes)
    nodes = [(node.kind, node.value) for node in ast.nodes]
    edges = []
    for parent, node in enumerate(ast.nodes):
        if node.kind == KIND_IDENTIFIER and node.fields:
            raise MalformedAst(f"{ast.source_id}: identifier node {parent} has fields")
        for field_name, children in node.fields:
            if not children:
                raise MalformedAst(
                    f"{ast.source_id}: node {parent} field {field_name!r} is empty"
                )
            for c in children:
                if not 0 <= c < n:
                    raise MalformedAst(
                        f"{ast.source_id}: node {parent} references {c} (out of range)"
                    )
            edges.append(Hyperedge(field_name, tuple(children), parent))
    return HDHGraph(nodes=nodes, edges=edges, label=ast.label)


def validate_hdhg(g: HDHGraph) -> None:
    """Structural invariants: index ranges, head not in tails, connectivity."""
    n = len(g.nodes)
    tail_total = 0
    incoming = [0] * n
    for e in g.edges:
        if not e.tails:
            raise MalformedAst("hyperedge with empty tail set")
        if not 0 <= e.head < n:
            raise MalformedAst(f"hyperedge head {e.head} out of range")
        if len(set(e.tails)) != len(e.tails):
            raise MalformedAst("duplicate tail indices in one hyperedge")
        for t in e.tails:
            if not 0 <= t < n:
                raise MalformedAst(f"hyperedge tail {t} out of range")
            if t == e.head:
                raise MalformedAst("hyperedge head appears in its own tail set")
            incoming[t] += 1
        tail_total += len(e.tails)
    if g.edges:
        if tail_total != n - 1:
            raise MalformedAst(
                f"tail incidences ({tail_total}) != non-root nodes ({n - 1})"
            )
        roots = [i for i in range(n) if incoming[i] == 0]
        if len(roots) != 1:
            raise MalformedAst(f"expected one root, found {len(roots)}")
        # child -> parent reachability must cover every node
        parent_of = {}
        for e in g.edges:
            for t in e.tails:
                parent_of[t] = e.head
        for i in range(n):
            seen = set()
            j = i
            while j in parent_of:
                if j in seen:
                    raise MalformedAst("cycle in hyperedge structure")
                seen.add(j)
                j = parent_of[j]
            if j != roots[0]:
                raise MalformedAst(f"node {i} not connected to the root")
