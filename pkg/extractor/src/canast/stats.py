"""Corpus statistics over emitted JSONL files.

The hyperedge count per record equals the number of non-empty (parent,
field) pairs, matching the downstream graph-construction rule, so averages
here are comparable with the trained pipeline's numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass
class StatsReport:
    records: int
    label_count: int
    avg_nodes: float
    avg_hyperedges: float
    ast_node_types: int
    edge_types: int

    def lines(self) -> list:
        return [
            f"records: {self.records}",
            f"labels: {self.label_count}",
            f"avg nodes/graph: {self.avg_nodes:.2f}",
            f"avg hyperedges/graph: {self.avg_hyperedges:.2f}",
            f"distinct AST node types: {self.ast_node_types}",
            f"distinct edge types: {self.edge_types}",
        ]


def corpus_stats(corpus_file: str | Path) -> StatsReport:
    records = 0
    total_nodes = 0
    total_edges = 0
    labels = set()
    ast_types = set()
    edge_types = set()
    with open(corpus_file, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            records += 1
            if rec.get("label") is not None:
                labels.add(rec["label"])
            total_nodes += len(rec["nodes"])
            for node in rec["nodes"]:
                if node["kind"] == "ast":
                    ast_types.add(node["value"])
                for name, children in node["fields"]:
                    if children:
                        total_edges += 1
                        edge_types.add(name)
    if records == 0:
        raise ValueError(f"{corpus_file}: no records")
    return StatsReport(
        records=records,
        label_count=len(labels),
        avg_nodes=total_nodes / records,
        avg_hyperedges=total_edges / records,
        ast_node_types=len(ast_types),
        edge_types=len(edge_types),
    )
