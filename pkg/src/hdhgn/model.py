"""The hypergraph network: embeddings, two-stage attention layers, readout.

Each layer runs two attention-weighted message-passing stages over the
incidence pairs of a batch:

  stage 1: every hyperedge attends over its participants (tail nodes get the
  child projection, the head node the parent projection); the attended sum
  plus a projection of the edge-type embedding becomes the edge state.

  stage 2: every node attends over its incident hyperedges, whose states are
  projected by the node's role in each edge; the attended sum feeds a GRU-less
  update: elu(GraphNorm(W_a v + W_s h + b)).

Attention is narrow multi-head: the hidden dimension is split into
`heads` sub-channels, scores are scaled by 1/sqrt(hidden_dim), and head
outputs are concatenated with no extra output projection. Edge-type
embeddings are shared across layers; all other layer weights are per-layer.

Under the no_direction variant the role projections are tied (aliased to one
tensor), under no_hetero a single value-embedding table and projection serve
all nodes and there is a single edge type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .batching import BatchedGraph
from .encode import VARIANTS
from .errors import IdOutOfRange, LabelOutOfRange
from .rng import stream
from .tensor import Tensor
from .vocab import Vocab


@dataclass
class ModelConfig:
    num_classes: int = 0  # 0: derive from the training data
    layers: int = 4
    embed_dim: int = 128
    hidden_dim: int = 128
    heads: int = 8
    dropout: float = 0.2
    variant: str = "full"

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.hidden_dim % self.heads != 0:
            raise ValueError("hidden_dim must be divisible by heads")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    def to_obj(self) -> dict:
        return {
            "num_classes": self.num_classes,
            "layers": self.layers,
            "embed_dim": self.embed_dim,
            "hidden_dim": self.hidden_dim,
            "heads": self.heads,
            "dropout": self.dropout,
            "variant": self.variant,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ModelConfig":
        return cls(**obj)


class Parameters:
    """Named parameter tensors plus aliases for tied roles.

    Aliased names resolve to the same underlying tensor, so gradients of a
    tied projection accumulate once per use and the optimizer sees a single
    parameter.
    """

    def __init__(self, tensors: dict[str, Tensor], aliases: dict[str, str] | None = None):
        self.tensors = tensors
        self.aliases = aliases or {}

    def get(self, name: str) -> Tensor:
        return self.tensors[self.aliases.get(name, name)]

    def names(self) -> list[str]:
        return sorted(self.tensors)

    def items(self):
        return self.tensors.items()

    def astype(self, dtype) -> "Parameters":
        cast = {
            k: Tensor(v.data.astype(dtype), requires_grad=v.requires_grad)
            for k, v in self.tensors.items()
        }
        return Parameters(cast, dict(self.aliases))

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.grad = None


def _tied_aliases(config: ModelConfig) -> dict[str, str]:
    if config.variant != "no_direction":
        return {}
    aliases = {}
    for l in range(config.layers):
        for role in ("parent_msg", "to_parent_msg"):
            tied = role.replace("parent", "child")
            aliases[f"layer{l}.{role}.w"] = f"layer{l}.{tied}.w"
            aliases[f"layer{l}.{role}.b"] = f"layer{l}.{tied}.b"
    return aliases


def _param_spec(config: ModelConfig, vocab: Vocab) -> list[tuple[str, str, tuple]]:
    """(name, init-kind, shape) in the fixed order random draws happen."""
    c1, c2 = config.embed_dim, config.hidden_dim
    spec: list[tuple[str, str, tuple]] = []
    if config.variant == "no_hetero":
        spec += [
            ("embed.value", "embed", (len(vocab.identifier_values), c1)),
            ("proj.value.w", "matrix", (c1, c2)),
            ("proj.value.b", "zeros", (c2,)),
        ]
    else:
        spec += [
            ("embed.ast", "embed", (len(vocab.ast_values), c1)),
            ("embed.ident", "embed", (len(vocab.identifier_values), c1)),
            ("proj.ast.w", "matrix", (c1, c2)),
            ("proj.ast.b", "zeros", (c2,)),
            ("proj.ident.w", "matrix", (c1, c2)),
            ("proj.ident.b", "zeros", (c2,)),
        ]
    spec.append(("embed.edge", "embed", (len(vocab.edge_types), c2)))
    tied = config.variant == "no_direction"
    for l in range(config.layers):
        pre = f"layer{l}."
        spec += [(pre + "child_msg.w", "matrix", (c2, c2)), (pre + "child_msg.b", "zeros", (c2,))]
        if not tied:
            spec += [
                (pre + "parent_msg.w", "matrix", (c2, c2)),
                (pre + "parent_msg.b", "zeros", (c2,)),
            ]
        spec += [
            (pre + "s1.query.w", "matrix", (c2, c2)),
            (pre + "s1.key.w", "matrix", (c2, c2)),
            (pre + "s1.value.w", "matrix", (c2, c2)),
            (pre + "edge_type.w", "matrix", (c2, c2)),
            (pre + "edge_type.b", "zeros", (c2,)),
            (pre + "to_child_msg.w", "matrix", (c2, c2)),
            (pre + "to_child_msg.b", "zeros", (c2,)),
        ]
        if not tied:
            spec += [
                (pre + "to_parent_msg.w", "matrix", (c2, c2)),
                (pre + "to_parent_msg.b", "zeros", (c2,)),
            ]
        spec += [
            (pre + "s2.query.w", "matrix", (c2, c2)),
            (pre + "s2.key.w", "matrix", (c2, c2)),
            (pre + "s2.value.w", "matrix", (c2, c2)),
            (pre + "update.agg.w", "matrix", (c2, c2)),
            (pre + "update.self.w", "matrix", (c2, c2)),
            (pre + "update.b", "zeros", (c2,)),
            (pre + "gn.shift", "ones", (c2,)),
            (pre + "gn.gain", "ones", (c2,)),
            (pre + "gn.bias", "zeros", (c2,)),
        ]
    spec += [
        ("pool.query", "vector", (c2,)),
        ("mlp.hidden.w", "matrix", (c2, c2)),
        ("mlp.hidden.b", "zeros", (c2,)),
        ("mlp.out.w", "matrix", (c2, config.num_classes)),
        ("mlp.out.b", "zeros", (config.num_classes,)),
    ]
    return spec


def init_parameters(config: ModelConfig, vocab: Vocab, seed: int) -> Parameters:
    """Glorot-uniform matrices, zero biases, scaled-normal embedding tables."""
    rng = stream(seed, "init")
    tensors: dict[str, Tensor] = {}
    for name, kind, shape in _param_spec(config, vocab):
        if kind == "matrix":
            limit = math.sqrt(6.0 / (shape[0] + shape[1]))
            data = rng.uniform(-limit, limit, size=shape)
        elif kind == "vector":
            limit = math.sqrt(6.0 / (shape[0] + 1))
            data = rng.uniform(-limit, limit, size=shape)
        elif kind == "embed":
            data = rng.standard_normal(shape) / math.sqrt(shape[1])
        elif kind == "ones":
            data = np.ones(shape)
        else:
            data = np.zeros(shape)
        tensors[name] = Tensor(data.astype(np.float32), requires_grad=True)
    return Parameters(tensors, _tied_aliases(config))


@dataclass
class ForwardTrace:
    node_hidden: list  # numpy snapshots h^0 .. h^L
    edge_states: list  # numpy q_e per layer
    stage1_attn: list  # numpy [pairs, heads] per layer
    stage2_attn: list
    pool_attn: np.ndarray
    pooled: np.ndarray
    logits: Tensor
    pred: np.ndarray
    loss: Tensor | None = None
    edge_attended: list = None  # o_e per layer (attended participant mix)
    edge_type_bias: list = None  # z_e per layer (projected edge-type vector)
    stage1_messages: list = None  # populated only with trace_messages=True
    stage2_messages: list = None


def _check_ids(values: np.ndarray, table: Tensor, what: str) -> None:
    if values.size and (values.min() < 0 or values.max() >= table.shape[0]):
        raise IdOutOfRange(f"{what}: id outside table of {table.shape[0]} rows")


def _head_dot(a: Tensor, b: Tensor, heads: int, scale: float) -> Tensor:
    rows, c2 = a.shape
    shaped = (rows, heads, c2 // heads)
    prod = T.mul(T.reshape(a, shaped), T.reshape(b, shaped))
    return T.mul(T.reduce_sum(prod, axis=2), scale)


def _embed_nodes(batch: BatchedGraph, params: Parameters, config: ModelConfig) -> Tensor:
    if config.variant == "no_hetero":
        table = params.get("embed.value")
        _check_ids(batch.node_value, table, "node value")
        d = T.gather_rows(table, batch.node_value)
        return T.linear(d, params.get("proj.value.w"), params.get("proj.value.b"))
    ast_rows = np.flatnonzero(batch.node_kind == 0)
    ident_rows = np.flatnonzero(batch.node_kind == 1)
    _check_ids(batch.node_value[ast_rows], params.get("embed.ast"), "ast value")
    _check_ids(batch.node_value[ident_rows], params.get("embed.ident"), "identifier value")
    h_ast = T.linear(
        T.gather_rows(params.get("embed.ast"), batch.node_value[ast_rows]),
        params.get("proj.ast.w"),
        params.get("proj.ast.b"),
    )
    h_ident = T.linear(
        T.gather_rows(params.get("embed.ident"), batch.node_value[ident_rows]),
        params.get("proj.ident.w"),
        params.get("proj.ident.b"),
    )
    # reassemble original node order from the two kind-partitioned blocks
    where = np.empty(batch.num_nodes, dtype=np.int64)
    where[ast_rows] = np.arange(len(ast_rows))
    where[ident_rows] = len(ast_rows) + np.arange(len(ident_rows))
    return T.gather_rows(T.concat_rows([h_ast, h_ident]), where)


def _composed(role_w: Tensor, role_b: Tensor, proj_w: Tensor) -> tuple[Tensor, Tensor]:
    """Fold `proj(role(x)) = (x @ Wr + br) @ Wp` into one affine map.

    Associativity makes this exact up to rounding and removes one GEMM over
    the (large) row dimension per projection.
    """
    w = T.matmul(role_w, proj_w)
    b = T.matmul(T.reshape(role_b, (1, role_b.shape[0])), proj_w)
    return w, b


def embed_nodes(batch: BatchedGraph, params: Parameters, config: ModelConfig) -> Tensor:
    """Initial node features: per-kind value embedding, per-kind projection."""
    return _embed_nodes(batch, params, config)


def _empty_trace() -> "ForwardTrace":
    return ForwardTrace(
        node_hidden=[],
        edge_states=[],
        stage1_attn=[],
        stage2_attn=[],
        pool_attn=None,
        pooled=None,
        logits=None,
        pred=None,
        edge_attended=[],
        edge_type_bias=[],
        stage1_messages=None,
        stage2_messages=None,
    )


def hdhg_conv(
    h: Tensor,
    batch: BatchedGraph,
    d_e: Tensor,
    params: Parameters,
    layer: int,
    config: ModelConfig,
) -> Tensor:
    """One message-passing layer (evaluation mode); returns updated features."""
    return _conv_layer(h, batch, d_e, params, layer, config, False, None, _empty_trace())


def _conv_layer(
    h: Tensor,
    batch: BatchedGraph,
    d_e: Tensor,
    params: Parameters,
    layer: int,
    config: ModelConfig,
    train: bool,
    rng,
    trace: ForwardTrace,
) -> Tensor:
    p = lambda name: params.get(f"layer{layer}.{name}")
    heads = config.heads
    c2 = config.hidden_dim
    scale = 1.0 / math.sqrt(c2)
    n, e = batch.num_nodes, batch.num_edges

    # stage 1: nodes -> hyperedges. The role projection (child/parent) and
    # the attention key/value projections are composed per role, then applied
    # to the tail-row and head-row blocks and merged back into pair order.
    h_tails = T.gather_rows(h, batch.s1_tail_node)
    h_heads = T.gather_rows(h, batch.s1_head_node)

    def role_blocks(proj_name):
        wc, bc = _composed(p("child_msg.w"), p("child_msg.b"), p(proj_name))
        wp, bp = _composed(p("parent_msg.w"), p("parent_msg.b"), p(proj_name))
        merged = T.concat_rows([T.linear(h_tails, wc, bc), T.linear(h_heads, wp, bp)])
        return T.gather_rows(merged, batch.s1_merge)

    k1 = role_blocks("s1.key.w")
    q1 = T.gather_rows(T.matmul(d_e, p("s1.query.w")), batch.s1_edge)
    alpha1 = T.segment_softmax(_head_dot(q1, k1, heads, scale), batch.s1_edge, e)
    trace.stage1_attn.append(alpha1.data)
    alpha1 = T.dropout(alpha1, config.dropout, rng, train)
    v1 = T.reshape(role_blocks("s1.value.w"), (len(batch.s1_edge), heads, c2 // heads))
    o_e = T.reshape(T.segment_weighted_sum(v1, alpha1, batch.s1_edge, e), (e, c2))
    z_e = T.linear(d_e, p("edge_type.w"), p("edge_type.b"))
    q_e = T.add(o_e, z_e)
    trace.edge_attended.append(o_e.data)
    trace.edge_type_bias.append(z_e.data)
    trace.edge_states.append(q_e.data)
    if trace.stage1_messages is not None:
        # audit-only: raw per-pair role messages (numpy, off the tape)
        m_t = h.data[batch.s1_tail_node] @ p("child_msg.w").data + p("child_msg.b").data
        m_h = h.data[batch.s1_head_node] @ p("parent_msg.w").data + p("parent_msg.b").data
        trace.stage1_messages.append(np.concatenate([m_t, m_h])[batch.s1_merge])

    # stage 2: hyperedges -> nodes, with the same composition trick over the
    # [to-child rows; to-parent rows] layout that s2_sel indexes into.
    def edge_blocks(proj_name):
        wc, bc = _composed(p("to_child_msg.w"), p("to_child_msg.b"), p(proj_name))
        wp, bp = _composed(p("to_parent_msg.w"), p("to_parent_msg.b"), p(proj_name))
        both = T.concat_rows([T.linear(q_e, wc, bc), T.linear(q_e, wp, bp)])
        return T.gather_rows(both, batch.s2_sel)

    if trace.stage2_messages is not None:
        m_c = q_e.data @ p("to_child_msg.w").data + p("to_child_msg.b").data
        m_p = q_e.data @ p("to_parent_msg.w").data + p("to_parent_msg.b").data
        trace.stage2_messages.append(np.concatenate([m_c, m_p])[batch.s2_sel])

    m2k = edge_blocks("s2.key.w")
    q2 = T.gather_rows(T.matmul(h, p("s2.query.w")), batch.s2_node)
    alpha2 = T.segment_softmax(_head_dot(q2, m2k, heads, scale), batch.s2_node, n)
    trace.stage2_attn.append(alpha2.data)
    alpha2 = T.dropout(alpha2, config.dropout, rng, train)
    v2 = T.reshape(edge_blocks("s2.value.w"), (len(batch.s2_node), heads, c2 // heads))
    v_n = T.reshape(T.segment_weighted_sum(v2, alpha2, batch.s2_node, n), (n, c2))

    u = T.add(T.add(T.matmul(v_n, p("update.agg.w")), T.matmul(h, p("update.self.w"))), p("update.b"))
    normed = T.graph_norm(u, batch.graph_ids, batch.num_graphs, p("gn.shift"), p("gn.gain"), p("gn.bias"))
    out = T.elu(normed)
    return T.dropout(out, config.dropout, rng, train)


def forward(
    batch: BatchedGraph,
    params: Parameters,
    config: ModelConfig,
    train: bool = False,
    rng: np.random.Generator | None = None,
    trace_messages: bool = False,
) -> ForwardTrace:
    """Run the full network; deterministic given (params, batch, rng state).

    trace_messages additionally snapshots the raw per-incidence message
    vectors of both stages (audit only; they are folded away in the
    composed projections otherwise).
    """
    if train and config.dropout > 0.0 and rng is None:
        raise ValueError("training forward with dropout needs an rng stream")
    heads, c2 = config.heads, config.hidden_dim
    trace = _empty_trace()
    if trace_messages:
        trace.stage1_messages = []
        trace.stage2_messages = []
    h = _embed_nodes(batch, params, config)
    trace.node_hidden.append(h.data)
    edge_table = params.get("embed.edge")
    _check_ids(batch.edge_type, edge_table, "edge type")
    d_e = T.gather_rows(edge_table, batch.edge_type)
    for layer in range(config.layers):
        h = _conv_layer(h, batch, d_e, params, layer, config, train, rng, trace)
        trace.node_hidden.append(h.data)

    # attention pooling over each graph's nodes, one score per head
    shaped = (batch.num_nodes, heads, c2 // heads)
    pool_q = T.reshape(params.get("pool.query"), (1, heads, c2 // heads))
    scores = T.reduce_sum(T.mul(T.reshape(h, shaped), pool_q), axis=2)
    alpha = T.segment_softmax(scores, batch.graph_ids, batch.num_graphs)
    trace.pool_attn = alpha.data
    alpha = T.dropout(alpha, config.dropout, rng, train)
    pooled = T.reshape(
        T.segment_weighted_sum(T.reshape(h, shaped), alpha, batch.graph_ids, batch.num_graphs),
        (batch.num_graphs, c2),
    )
    trace.pooled = pooled.data
    hidden = T.elu(T.linear(pooled, params.get("mlp.hidden.w"), params.get("mlp.hidden.b")))
    logits = T.linear(hidden, params.get("mlp.out.w"), params.get("mlp.out.b"))
    trace.logits = logits
    trace.pred = T.softmax_rows(np.asarray(logits.data))
    return trace


@dataclass
class LossAndGrad:
    loss: float
    grads: dict
    logits: np.ndarray


def loss_and_grad(
    batch: BatchedGraph,
    params: Parameters,
    config: ModelConfig,
    rng: np.random.Generator | None = None,
) -> LossAndGrad:
    """Training forward + cross-entropy + backward over one batch."""
    if np.any(batch.labels < 0):
        raise LabelOutOfRange("all graphs in a training batch must be labeled")
    params.zero_grad()
    with T.Tape() as tape:
        trace = forward(batch, params, config, train=True, rng=rng)
        loss = T.cross_entropy(trace.logits, batch.labels)
    tape.backward(loss)
    grads = {name: T.grad_or_zeros(params.tensors[name]) for name in params.names()}
    return LossAndGrad(loss=float(loss.data), grads=grads, logits=np.asarray(trace.logits.data))
