"""Acceptance criteria, one test per criterion, cheapest first.

Each test prints one PASS line (pytest -s shows them); a failure prints
FAIL via the assertion. The desk-scale experiment is the long pole and runs
last; its accuracy values are reported, while the asserted facts are the
two comparisons (10x majority baseline, full above star expansion).
"""

import json
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from hdhgn import ast_io
from hdhgn.batching import batch_graphs
from hdhgn.cli import main as cli_main
from hdhgn.encode import encode_graph
from hdhgn.experiments import gradient_check, run_trials
from hdhgn.graphs import Hyperedge, build_hdhg, validate_hdhg
from hdhgn.model import ModelConfig, forward, init_parameters
from hdhgn.rng import stream
from hdhgn.synthetic import random_encoded_graph, synthetic_vocab
from hdhgn.training import TrainConfig, evaluate, train
from hdhgn.vocab import build_vocab

from fixtures_data import a_eq_1_record, two_statement_module_record
from reference_dense import reference_forward

FIXTURES = Path(__file__).parent / "fixtures" / "desk20.jsonl"


@pytest.fixture(scope="module")
def corpus():
    return list(ast_io.read_jsonl(FIXTURES))


def test_gradient_correctness_ten_seeds():
    started = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        report = gradient_check(seed=seed)
        worst = max(worst, report.max_rel_err)
    elapsed = time.perf_counter() - started
    assert worst < 1e-4, f"FAIL gradient correctness: {worst:.3e}"
    assert elapsed < 120, f"FAIL gradient correctness runtime: {elapsed:.0f}s"
    print(f"PASS gradient correctness: max rel err {worst:.3e} over 10 seeds in {elapsed:.1f}s")


def test_attention_normalization_hundred_graphs():
    vocab = synthetic_vocab()
    cfg = ModelConfig(num_classes=3, layers=2, embed_dim=32, hidden_dim=32, heads=4, dropout=0.0)
    params = init_parameters(cfg, vocab, seed=0)
    rng = stream(17, "attn-norm")
    worst = 0.0
    for start in range(0, 100, 10):
        graphs = [
            random_encoded_graph(rng, vocab, int(rng.integers(5, 51)))
            for _ in range(10)
        ]
        batch = batch_graphs(graphs)
        trace = forward(batch, params, cfg, train=False)

        def group_err(weights, seg, count):
            sums = np.zeros((count,) + weights.shape[1:])
            np.add.at(sums, seg, weights)
            present = np.unique(seg)
            return float(np.max(np.abs(sums[present] - 1.0))) if len(present) else 0.0

        for alpha in trace.stage1_attn:
            worst = max(worst, group_err(alpha, batch.s1_edge, batch.num_edges))
        for alpha in trace.stage2_attn:
            worst = max(worst, group_err(alpha, batch.s2_node, batch.num_nodes))
        worst = max(worst, group_err(trace.pool_attn, batch.graph_ids, batch.num_graphs))
    assert worst < 1e-6, f"FAIL attention normalization: {worst:.3e}"
    print(f"PASS attention normalization: worst |sum-1| = {worst:.2e} on 100 graphs")


def test_permutation_invariance_twenty_graphs():
    from hdhgn.encode import EncodedGraph

    vocab = synthetic_vocab()
    cfg = ModelConfig(num_classes=3, layers=3, embed_dim=32, hidden_dim=32, heads=4, dropout=0.0)
    params = init_parameters(cfg, vocab, seed=3)
    rng = stream(23, "perm")
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(4, 30))
        g = random_encoded_graph(rng, vocab, n)
        perm = rng.permutation(n)
        kind = np.empty_like(g.node_kind)
        value = np.empty_like(g.node_value)
        kind[perm] = g.node_kind
        value[perm] = g.node_value
        permuted = EncodedGraph(
            node_kind=kind,
            node_value=value,
            edge_type=g.edge_type,
            tails=[perm[t] for t in g.tails],
            heads=perm[g.heads],
            label=g.label,
            vocab_digest=g.vocab_digest,
        )
        a = forward(batch_graphs([g]), params, cfg).pred
        b = forward(batch_graphs([permuted]), params, cfg).pred
        worst = max(worst, float(np.max(np.abs(a - b))))
    assert worst < 1e-5, f"FAIL permutation invariance: {worst:.3e}"
    print(f"PASS permutation invariance: worst |dpred| = {worst:.2e} on 20 graphs")


def test_dense_oracle_equivalence():
    vocab = synthetic_vocab()
    rng = stream(29, "oracle")
    worst = 0.0
    for layers in (1, 2, 3, 4):
        cfg = ModelConfig(
            num_classes=3, layers=layers, embed_dim=24, hidden_dim=24, heads=3, dropout=0.0
        )
        params = init_parameters(cfg, vocab, seed=layers).astype(np.float64)
        arrays = {k: v.data for k, v in params.items()}
        for _ in range(5):
            g = random_encoded_graph(rng, vocab, int(rng.integers(2, 21)))
            trace = forward(batch_graphs([g]), params, cfg)
            ref_pred, ref_states = reference_forward(g, arrays, layers, cfg.heads)
            for got, want in zip(trace.node_hidden, ref_states):
                worst = max(worst, float(np.max(np.abs(got - want))))
            worst = max(worst, float(np.max(np.abs(trace.pred[0] - ref_pred))))
    assert worst < 1e-6, f"FAIL dense-oracle equivalence: {worst:.3e}"
    print(f"PASS dense-oracle equivalence: worst |diff| = {worst:.2e} (layers 1-4)")


def test_structural_fidelity(corpus):
    g = build_hdhg(ast_io.ast_from_obj(a_eq_1_record()))
    assert len(g.nodes) == 7 and len(g.edges) == 6, "FAIL structural fidelity: a = 1 shape"
    assert g.edges[0] == Hyperedge("body", (1,), 0)
    assert g.edges[3] == Hyperedge("id", (3,), 2)
    multi = build_hdhg(ast_io.ast_from_obj(two_statement_module_record()))
    assert multi.edges == [Hyperedge("body", (1, 2), 0)], (
        "FAIL structural fidelity: multi-child field must form one hyperedge"
    )
    for record in corpus:
        validate_hdhg(build_hdhg(record))  # B-hypergraph invariant corpus-wide
    print(f"PASS structural fidelity: fixture exact; invariants hold on {len(corpus)} graphs")


def test_overfit_capacity(corpus):
    started = time.perf_counter()
    by_label = {}
    for rec in corpus:
        by_label.setdefault(rec.label, []).append(rec)
    subset = [rec for label in range(8) for rec in by_label[label][:10]]
    assert len(subset) == 80
    train_cfg = TrainConfig(
        epochs=200,
        batch_size=8,
        learning_rate=5e-5,
        trials=1,
        seed=11,
        split_ratios=(1.0, 0.0, 0.0),
        min_identifier_freq=2,
        report_every=50,
    )
    outcome = train(train_cfg, ModelConfig(), subset)
    accuracy = evaluate(outcome.checkpoint, outcome.encoded_train)
    elapsed = time.perf_counter() - started
    reached = [rec["epoch"] for rec in outcome.curve if rec["train_acc"] == 1.0]
    assert accuracy == 1.0, f"FAIL overfit capacity: train accuracy {accuracy:.3f}"
    assert elapsed < 600, f"FAIL overfit capacity runtime: {elapsed:.0f}s"
    # loss is monotone non-increasing across 10-epoch windows (local noise ok)
    losses = [rec["train_loss"] for rec in outcome.curve]
    windows = [float(np.mean(losses[i : i + 10])) for i in range(0, len(losses), 10)]
    for earlier, later in zip(windows, windows[1:]):
        assert later <= earlier + 1e-6, f"FAIL overfit capacity: loss windows rise ({earlier:.4f} -> {later:.4f})"
    first = reached[0] if reached else train_cfg.epochs
    print(
        f"PASS overfit capacity: 100% train accuracy (first clean epoch ~{first}) in {elapsed:.0f}s"
    )


def test_determinism_checkpoints_and_reports(corpus, tmp_path):
    cfg_obj = {
        "seed": 5,
        "variant": "full",
        "model": {"layers": 2, "embed_dim": 32, "hidden_dim": 32, "heads": 4, "dropout": 0.2},
        "train": {"epochs": 2, "batch_size": 32, "learning_rate": 5e-5, "trials": 1},
        "paths": {},
    }
    blobs = []
    for run in ("a", "b"):
        base = tmp_path / run
        base.mkdir()
        corpus_path = base / "corpus.jsonl"
        ast_io.write_jsonl(corpus_path, corpus[:300])
        cfg = dict(cfg_obj)
        cfg["paths"] = {
            "corpus": str(corpus_path),
            "checkpoint": str(base / "model.ckpt"),
            "report_dir": str(base / "reports"),
        }
        cfg_path = base / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        assert cli_main(["train", "--config", str(cfg_path)]) == 0
        blobs.append(
            (
                (base / "model.ckpt").read_bytes(),
                (base / "reports" / "train-report.json").read_bytes(),
            )
        )
    assert blobs[0][0] == blobs[1][0], "FAIL determinism: checkpoints differ"
    assert blobs[0][1] == blobs[1][1], "FAIL determinism: reports differ"
    print(
        f"PASS determinism: checkpoint ({len(blobs[0][0])} bytes) and report "
        f"({len(blobs[0][1])} bytes) byte-identical across reruns"
    )


def test_desk_scale_experiment(corpus, tmp_path):
    started = time.perf_counter()
    reports = {}
    for variant in ("full", "no_hyperedge"):
        train_cfg = TrainConfig(
            epochs=100,
            batch_size=32,
            learning_rate=5e-5,
            trials=3,
            seed=100,
            variant=variant,
            report_every=25,
        )
        reports[variant] = run_trials(train_cfg, ModelConfig(variant=variant), corpus)

    # majority-class baseline: share of the most frequent label (balanced: 1/20)
    labels = [rec.label for rec in corpus]
    majority = max(labels.count(x) for x in set(labels)) / len(labels)

    full, star = reports["full"], reports["no_hyperedge"]
    elapsed = time.perf_counter() - started
    summary = {
        "full": {"accuracies": [t.test_accuracy for t in full.trials], "mean": full.mean, "sd": full.sd},
        "no_hyperedge": {
            "accuracies": [t.test_accuracy for t in star.trials],
            "mean": star.mean,
            "sd": star.sd,
        },
        "majority_baseline": majority,
        "wall_minutes": elapsed / 60,
    }
    (tmp_path / "desk20-report.json").write_text(json.dumps(summary, indent=2))
    print("desk-scale accuracies (reported):", json.dumps(summary, indent=2))
    assert full.mean >= 10 * majority, (
        f"FAIL desk scale: full mean {full.mean:.4f} < 10x baseline {majority:.4f}"
    )
    assert full.mean > star.mean, (
        f"FAIL desk scale: full mean {full.mean:.4f} not above no_hyperedge {star.mean:.4f}"
    )
    assert elapsed < 7200, f"FAIL desk scale runtime: {elapsed / 60:.0f} min"
    print(
        f"PASS desk scale: full {full.mean:.4f}±{full.sd:.4f} > "
        f"no_hyperedge {star.mean:.4f}±{star.sd:.4f}, baseline {majority:.3f}, "
        f"{elapsed / 60:.0f} min"
    )
