"""Disjoint-union batches with precomputed incidence-pair views.

The model's two message-passing stages need the node/hyperedge incidences in
two groupings:

stage 1 (node -> hyperedge): pairs ordered per edge as [tails..., head] so
    segment ids are the edge index. Role projections run on the tail rows
    and head rows separately; `s1_merge` gathers the concatenation
    [projected tails, projected heads] back into pair order.

stage 2 (hyperedge -> node): the same incidences grouped by node. `s2_sel`
    picks rows out of a [2E] table laid out as [per-edge message for
    tail-role nodes; per-edge message for the head-role node].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encode import EncodedGraph
from .errors import EmptyBatch


@dataclass
class BatchedGraph:
    num_nodes: int
    num_edges: int
    num_graphs: int
    node_kind: np.ndarray  # [N]
    node_value: np.ndarray  # [N]
    graph_ids: np.ndarray  # [N]
    edge_type: np.ndarray  # [E]
    labels: np.ndarray  # [G], -1 for unlabeled
    node_offsets: np.ndarray  # [G+1]
    edge_offsets: np.ndarray  # [G+1]
    tails: list  # per edge, batch-level node indices
    heads: np.ndarray  # [E]
    s1_edge: np.ndarray  # [P] pair -> edge id (non-decreasing)
    s1_tail_node: np.ndarray  # [T] node id per tail pair, in pair order
    s1_head_node: np.ndarray  # [E] node id per head pair
    s1_merge: np.ndarray  # [P] gather indices into concat(tails, heads)
    s2_node: np.ndarray  # [P] pair -> node id (non-decreasing)
    s2_sel: np.ndarray  # [P] edge + (0 tail-role | E head-role)
    vocab_digest: str


def batch_graphs(graphs: list[EncodedGraph]) -> BatchedGraph:
    if not graphs:
        raise EmptyBatch("cannot batch zero graphs")
    digest = graphs[0].vocab_digest
    for g in graphs[1:]:
        if g.vocab_digest != digest:
            raise EmptyBatch("graphs in one batch must share a vocabulary")

    node_offsets = np.cumsum([0] + [g.num_nodes for g in graphs])
    edge_offsets = np.cumsum([0] + [g.num_edges for g in graphs])
    n, e, num_graphs = int(node_offsets[-1]), int(edge_offsets[-1]), len(graphs)

    node_kind = np.concatenate([g.node_kind for g in graphs])
    node_value = np.concatenate([g.node_value for g in graphs])
    graph_ids = np.repeat(np.arange(num_graphs), [g.num_nodes for g in graphs])
    labels = np.array([g.label for g in graphs], dtype=np.int64)
    edge_type = (
        np.concatenate([g.edge_type for g in graphs])
        if e
        else np.zeros(0, dtype=np.int64)
    )
    tails = []
    heads = np.zeros(e, dtype=np.int64)
    for gi, g in enumerate(graphs):
        off_n, off_e = int(node_offsets[gi]), int(edge_offsets[gi])
        for j, ts in enumerate(g.tails):
            tails.append(ts + off_n)
            heads[off_e + j] = g.heads[j] + off_n

    # stage-1 pair view: per edge [tails..., head]
    s1_edge, s1_merge, s1_tail_node, s1_head_node = [], [], [], []
    s2_pairs = []  # (node, sel)
    t_count = sum(len(ts) for ts in tails)
    ti = 0
    for ei in range(e):
        for t in tails[ei]:
            s1_edge.append(ei)
            s1_merge.append(ti)
            s1_tail_node.append(int(t))
            s2_pairs.append((int(t), ei))
            ti += 1
        s1_edge.append(ei)
        s1_merge.append(t_count + ei)
        s1_head_node.append(int(heads[ei]))
        s2_pairs.append((int(heads[ei]), e + ei))
    s2_pairs.sort(key=lambda p: p[0])

    as_arr = lambda xs: np.array(xs, dtype=np.int64)
    return BatchedGraph(
        num_nodes=n,
        num_edges=e,
        num_graphs=num_graphs,
        node_kind=node_kind,
        node_value=node_value,
        graph_ids=graph_ids,
        edge_type=edge_type,
        labels=labels,
        node_offsets=node_offsets,
        edge_offsets=edge_offsets,
        tails=tails,
        heads=heads,
        s1_edge=as_arr(s1_edge),
        s1_tail_node=as_arr(s1_tail_node),
        s1_head_node=as_arr(s1_head_node),
        s1_merge=as_arr(s1_merge),
        s2_node=as_arr([p[0] for p in s2_pairs]),
        s2_sel=as_arr([p[1] for p in s2_pairs]),
        vocab_digest=digest,
    )


def unbatch(batch: BatchedGraph) -> list[EncodedGraph]:
    """Recover the original encoded graphs (exact inverse of batch_graphs)."""
    out = []
    for gi in range(batch.num_graphs):
        n_lo, n_hi = int(batch.node_offsets[gi]), int(batch.node_offsets[gi + 1])
        e_lo, e_hi = int(batch.edge_offsets[gi]), int(batch.edge_offsets[gi + 1])
        out.append(
            EncodedGraph(
                node_kind=batch.node_kind[n_lo:n_hi].copy(),
                node_value=batch.node_value[n_lo:n_hi].copy(),
                edge_type=batch.edge_type[e_lo:e_hi].copy(),
                tails=[batch.tails[j] - n_lo for j in range(e_lo, e_hi)],
                heads=batch.heads[e_lo:e_hi] - n_lo,
                label=int(batch.labels[gi]),
                vocab_digest=batch.vocab_digest,
            )
        )
    return out
