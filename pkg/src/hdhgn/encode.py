"""Integer-encoded graphs and ablation-variant materialisation.

Variants:
  full          unchanged graphs.
  no_hyperedge  star expansion: a k-tail hyperedge becomes k single-tail
                hyperedges of the same type and head.
  no_hetero     node kinds collapse to one, node values re-encode into a
                merged string vocabulary, edge types collapse to one.
  no_direction  graphs unchanged; the model ties its role projections
                (see the model layer), so this is a no-op here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EncodingError, MalformedAst
from .graphs import HDHGraph
from .vocab import UNK_TOKEN, Vocab

VARIANTS = ("full", "no_hyperedge", "no_hetero", "no_direction")

KIND_AST_ID = 0
KIND_IDENTIFIER_ID = 1

MERGED_EDGE_TOKEN = "<edge>"


@dataclass
class EncodedGraph:
    node_kind: np.ndarray  # [N] int8, 0 = ast, 1 = identifier
    node_value: np.ndarray  # [N] int64 into the kind's value table
    edge_type: np.ndarray  # [E] int64
    tails: list  # per edge: int64 array of tail node indices
    heads: np.ndarray  # [E] int64
    label: int  # -1 when unlabeled
    vocab_digest: str

    @property
    def num_nodes(self) -> int:
        return int(self.node_kind.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.heads.shape[0])


def encoded_equal(a: EncodedGraph, b: EncodedGraph) -> bool:
    return (
        a.label == b.label
        and a.vocab_digest == b.vocab_digest
        and np.array_equal(a.node_kind, b.node_kind)
        and np.array_equal(a.node_value, b.node_value)
        and np.array_equal(a.edge_type, b.edge_type)
        and np.array_equal(a.heads, b.heads)
        and len(a.tails) == len(b.tails)
        and all(np.array_equal(x, y) for x, y in zip(a.tails, b.tails))
    )


def encode_graph(g: HDHGraph, vocab: Vocab) -> EncodedGraph:
    """Map strings through the vocabulary; OOV identifiers become UNK,
    OOV AST node types or edge types raise EncodingError."""
    kinds = np.zeros(len(g.nodes), dtype=np.int8)
    values = np.zeros(len(g.nodes), dtype=np.int64)
    for i, (kind, value) in enumerate(g.nodes):
        if kind == "ast":
            kinds[i] = KIND_AST_ID
            values[i] = vocab.ast_id(value)
        else:
            kinds[i] = KIND_IDENTIFIER_ID
            values[i] = vocab.identifier_id(value)
    edge_type = np.array([vocab.edge_id(e.edge_type) for e in g.edges], dtype=np.int64)
    tails = [np.array(e.tails, dtype=np.int64) for e in g.edges]
    heads = np.array([e.head for e in g.edges], dtype=np.int64)
    label = -1 if g.label is None else vocab.label_id(g.label)
    return EncodedGraph(
        node_kind=kinds,
        node_value=values,
        edge_type=edge_type,
        tails=tails,
        heads=heads,
        label=label,
        vocab_digest=vocab.digest(),
    )


def merged_value_table(vocab: Vocab) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    """One value table over both node kinds, plus old-id -> merged-id maps.

    Equal strings from the two tables collapse to a single entry, which is
    exactly what "one node type" means. UNK keeps id 0.
    """
    merged: list[str] = [UNK_TOKEN]
    index = {UNK_TOKEN: 0}
    for word in vocab.ast_values:
        if word not in index:
            index[word] = len(merged)
            merged.append(word)
    for word in vocab.identifier_values:
        if word not in index:
            index[word] = len(merged)
            merged.append(word)
    ast_map = np.array([index[w] for w in vocab.ast_values], dtype=np.int64)
    ident_map = np.array([index[w] for w in vocab.identifier_values], dtype=np.int64)
    return tuple(merged), ast_map, ident_map


def variant_vocab(vocab: Vocab, variant: str) -> Vocab:
    """The vocabulary the model sees under a variant (merged for no_hetero)."""
    if variant != "no_hetero":
        return vocab
    merged, _, _ = merged_value_table(vocab)
    return Vocab(
        ast_values=(),
        identifier_values=merged,
        edge_types=(MERGED_EDGE_TOKEN,),
        label_names=vocab.label_names,
    )


def apply_variant(g: EncodedGraph, variant: str, vocab: Vocab) -> EncodedGraph:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant in ("full", "no_direction"):
        return g
    if variant == "no_hyperedge":
        edge_type = []
        tails = []
        heads = []
        for et, ts, h in zip(g.edge_type, g.tails, g.heads):
            for t in ts:
                edge_type.append(int(et))
                tails.append(np.array([t], dtype=np.int64))
                heads.append(int(h))
        return EncodedGraph(
            node_kind=g.node_kind,
            node_value=g.node_value,
            edge_type=np.array(edge_type, dtype=np.int64),
            tails=tails,
            heads=np.array(heads, dtype=np.int64),
            label=g.label,
            vocab_digest=g.vocab_digest,
        )
    # no_hetero
    if g.vocab_digest != vocab.digest():
        raise MalformedAst("graph was encoded against a different vocabulary")
    _, ast_map, ident_map = merged_value_table(vocab)
    values = np.empty_like(g.node_value)
    ast_rows = g.node_kind == KIND_AST_ID
    values[ast_rows] = ast_map[g.node_value[ast_rows]]
    values[~ast_rows] = ident_map[g.node_value[~ast_rows]]
    return EncodedGraph(
        node_kind=np.zeros_like(g.node_kind),
        node_value=values,
        edge_type=np.zeros_like(g.edge_type),
        tails=g.tails,
        heads=g.heads,
        label=g.label,
        vocab_digest=variant_vocab(vocab, variant).digest(),
    )
