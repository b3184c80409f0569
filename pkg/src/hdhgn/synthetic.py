"""Random trees/hypergraphs for verification harnesses and property tests."""

from __future__ import annotations

import numpy as np

from .encode import EncodedGraph
from .vocab import UNK_TOKEN, Vocab


def synthetic_vocab(
    num_ast: int = 12,
    num_identifiers: int = 8,
    num_edge_types: int = 6,
    num_classes: int = 3,
) -> Vocab:
    """A vocabulary of placeholder strings with the requested cardinalities."""
    return Vocab(
        ast_values=tuple(f"Ast{i}" for i in range(num_ast)),
        identifier_values=(UNK_TOKEN, *(f"id{i}" for i in range(num_identifiers - 1))),
        edge_types=tuple(f"field{i}" for i in range(num_edge_types)),
        label_names=tuple(str(i) for i in range(num_classes)),
    )


def random_encoded_graph(
    rng: np.random.Generator,
    vocab: Vocab,
    num_nodes: int,
    label: int | None = None,
) -> EncodedGraph:
    """A random rooted tree re-expressed as hyperedges.

    Children of one parent are grouped into runs of 1-3 to exercise
    multi-tail hyperedges; nodes with children are always grammar nodes,
    leaves are a random mix of grammar and identifier nodes.
    """
    children: dict[int, list[int]] = {}
    for i in range(1, num_nodes):
        children.setdefault(int(rng.integers(0, i)), []).append(i)

    node_kind = np.zeros(num_nodes, dtype=np.int8)
    node_value = np.zeros(num_nodes, dtype=np.int64)
    for i in range(num_nodes):
        if i in children or rng.random() < 0.5:
            node_kind[i] = 0
            node_value[i] = rng.integers(0, len(vocab.ast_values))
        else:
            node_kind[i] = 1
            node_value[i] = rng.integers(0, len(vocab.identifier_values))

    edge_type, tails, heads = [], [], []
    for parent in sorted(children):
        kids = children[parent]
        start = 0
        while start < len(kids):
            take = int(rng.integers(1, 4))
            group = kids[start : start + take]
            start += take
            edge_type.append(int(rng.integers(0, len(vocab.edge_types))))
            tails.append(np.array(group, dtype=np.int64))
            heads.append(parent)

    if label is None:
        label = int(rng.integers(0, len(vocab.label_names)))
    return EncodedGraph(
        node_kind=node_kind,
        node_value=node_value,
        edge_type=np.array(edge_type, dtype=np.int64),
        tails=tails,
        heads=np.array(heads, dtype=np.int64),
        label=label,
        vocab_digest=vocab.digest(),
    )
