"""Vocabularies mapping node values, edge types and labels to dense ids."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .ast_io import KIND_AST
from .errors import EmptyCorpus, EncodingError
from .graphs import HDHGraph

UNK_TOKEN = "<unk>"
UNK_ID = 0


def _by_freq_then_lex(counter: Counter) -> list[str]:
    return [w for w, _ in sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))]


@dataclass
class Vocab:
    """Bijections value <-> id. Identifier id 0 is reserved for UNK.

    Treat instances as immutable after construction; they are shared across
    threads during evaluation.
    """

    ast_values: tuple[str, ...]
    identifier_values: tuple[str, ...]
    edge_types: tuple[str, ...]
    label_names: tuple[str, ...]
    _ast: dict = field(init=False, repr=False, compare=False)
    _ident: dict = field(init=False, repr=False, compare=False)
    _edge: dict = field(init=False, repr=False, compare=False)
    _label: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._ast = {w: i for i, w in enumerate(self.ast_values)}
        self._ident = {w: i for i, w in enumerate(self.identifier_values)}
        self._edge = {w: i for i, w in enumerate(self.edge_types)}
        self._label = {w: i for i, w in enumerate(self.label_names)}

    def ast_id(self, value: str) -> int:
        try:
            return self._ast[value]
        except KeyError:
            raise EncodingError(f"AST node type {value!r} not in vocabulary") from None

    def identifier_id(self, value: str) -> int:
        return self._ident.get(value, UNK_ID)

    def edge_id(self, value: str) -> int:
        try:
            return self._edge[value]
        except KeyError:
            raise EncodingError(f"edge type {value!r} not in vocabulary") from None

    def label_id(self, label: int) -> int:
        try:
            return self._label[str(label)]
        except KeyError:
            raise EncodingError(f"label {label!r} not in vocabulary") from None

    @property
    def num_classes(self) -> int:
        return len(self.label_names)

    def to_obj(self) -> dict:
        return {
            "ast_values": list(self.ast_values),
            "identifier_values": list(self.identifier_values),
            "edge_types": list(self.edge_types),
            "label_names": list(self.label_names),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "Vocab":
        return cls(
            ast_values=tuple(obj["ast_values"]),
            identifier_values=tuple(obj["identifier_values"]),
            edge_types=tuple(obj["edge_types"]),
            label_names=tuple(obj["label_names"]),
        )

    def digest(self) -> str:
        canonical = json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_vocab(graphs: Iterable[HDHGraph], min_identifier_freq: int = 2) -> Vocab:
    """Collect vocabularies from (training-split) graphs.

    AST node types and edge types keep every observed value; identifiers
    below `min_identifier_freq` fall back to UNK. Ordering is frequency
    descending, ties lexicographic, so the result is reproducible.
    """
    ast_counts: Counter = Counter()
    ident_counts: Counter = Counter()
    edge_counts: Counter = Counter()
    labels: set[int] = set()
    count = 0
    for g in graphs:
        count += 1
        for kind, value in g.nodes:
            (ast_counts if kind == KIND_AST else ident_counts)[value] += 1
        for e in g.edges:
            edge_counts[e.edge_type] += 1
        if g.label is not None:
            labels.add(g.label)
    if count == 0:
        raise EmptyCorpus("vocabulary requested over an empty corpus")
    kept_idents = Counter(
        {w: c for w, c in ident_counts.items() if c >= min_identifier_freq and w != UNK_TOKEN}
    )
    return Vocab(
        ast_values=tuple(_by_freq_then_lex(ast_counts)),
        identifier_values=(UNK_TOKEN, *_by_freq_then_lex(kept_idents)),
        edge_types=tuple(_by_freq_then_lex(edge_counts)),
        label_names=tuple(str(x) for x in sorted(labels)),
    )
