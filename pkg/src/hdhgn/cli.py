"""Command-line entry point.

Subcommands: build, train, eval, trials, ablate, predict, gradcheck.
Exit codes: 0 ok, 2 schema violation, 3 I/O, 4 config error,
5 training abort, 6 vocabulary digest mismatch, 7 verification failure.
All randomness flows from the config/--seed value.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import ast_io, cache
from .batching import batch_graphs
from .checkpoint import load_checkpoint, params_from_checkpoint, save_checkpoint
from .config import RunConfig, load_run_config
from .encode import apply_variant, encode_graph, variant_vocab
from .errors import (
    ConfigError,
    HdhgnError,
    MalformedAst,
    SchemaError,
    TrainingAborted,
    VocabMismatch,
)
from .experiments import ablation_table, gradient_check, run_ablation, run_trials
from .graphs import build_hdhg
from .model import forward
from .training import evaluate, split_dataset, train
from .vocab import build_vocab

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_IO = 3
EXIT_CONFIG = 4
EXIT_TRAINING = 5
EXIT_VOCAB = 6
EXIT_VERIFY = 7

GRADCHECK_THRESHOLD = 1e-4


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _freeze_config(run: RunConfig) -> None:
    _write_json(run.paths.report_dir / "config.resolved.json", run.to_obj())


def _load_corpus(path) -> list:
    return list(ast_io.read_jsonl(path))


def cmd_build(args) -> int:
    records = _load_corpus(args.in_path)
    graphs = [build_hdhg(r) for r in records]
    vocab = build_vocab(graphs, args.min_freq)
    encoded = [encode_graph(g, vocab) for g in graphs]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cache.write_cache(out / "dataset.hdgc", encoded, vocab.digest())
    _write_json(out / "vocab.json", vocab.to_obj())
    nodes = sum(g.num_nodes for g in encoded)
    edges = sum(g.num_edges for g in encoded)
    print(f"graphs: {len(encoded)}")
    print(f"nodes: {nodes} (avg {nodes / len(encoded):.2f})")
    print(f"hyperedges: {edges} (avg {edges / len(encoded):.2f})")
    print(f"ast node types: {len(vocab.ast_values)}")
    print(f"identifier values: {len(vocab.identifier_values)}")
    print(f"edge types: {len(vocab.edge_types)}")
    print(f"labels: {len(vocab.label_names)}")
    print(f"cache: {out / 'dataset.hdgc'}")
    print(f"vocab: {out / 'vocab.json'}")
    return EXIT_OK


def cmd_train(args) -> int:
    run = load_run_config(args.config, args.variant, args.seed)
    records = _load_corpus(run.paths.corpus)
    run.paths.report_dir.mkdir(parents=True, exist_ok=True)
    _freeze_config(run)
    outcome = train(
        run.train,
        run.model,
        records,
        cache_dir=run.paths.cache_dir,
        metrics_path=run.paths.report_dir / "metrics.jsonl",
    )
    run.paths.checkpoint.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(run.paths.checkpoint, outcome.checkpoint)
    test_acc = evaluate(outcome.checkpoint, outcome.encoded_test) if outcome.encoded_test else None
    report = {
        "seed": run.seed,
        "variant": run.variant,
        "best_epoch": outcome.checkpoint.meta["best_epoch"],
        "best_val_accuracy": outcome.checkpoint.meta["best_val_accuracy"],
        "test_accuracy": test_acc,
        "curve": [{k: v for k, v in rec.items() if k != "seconds"} for rec in outcome.curve],
    }
    _write_json(run.paths.report_dir / "train-report.json", report)
    print(f"checkpoint: {run.paths.checkpoint}")
    print(f"best epoch: {report['best_epoch']} (val accuracy {report['best_val_accuracy']})")
    if test_acc is not None:
        print(f"test accuracy: {test_acc:.4f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    run = load_run_config(args.config, args.variant, args.seed)
    ck = load_checkpoint(args.checkpoint or run.paths.checkpoint)
    records = _load_corpus(run.paths.corpus)
    labels = [r.label for r in records] if run.train.stratify else None
    _, _, test_recs = split_dataset(records, run.train.split_ratios, run.train.seed, labels=labels)
    base = ck.vocab
    encoded = [
        apply_variant(encode_graph(build_hdhg(r), base), ck.model_config.variant, base)
        for r in test_recs
    ]
    accuracy = evaluate(ck, encoded)
    _write_json(run.paths.report_dir / "eval-report.json", {"test_accuracy": accuracy})
    print(f"test accuracy: {accuracy:.4f} ({len(encoded)} graphs)")
    return EXIT_OK


def cmd_trials(args) -> int:
    run = load_run_config(args.config, args.variant, args.seed)
    records = _load_corpus(run.paths.corpus)
    run.paths.report_dir.mkdir(parents=True, exist_ok=True)
    _freeze_config(run)

    def save_trial(i, outcome, result):
        save_checkpoint(run.paths.report_dir / f"trial{i}-{run.variant}.ckpt", outcome.checkpoint)

    report = run_trials(
        run.train, run.model, records, cache_dir=run.paths.cache_dir, on_trial=save_trial
    )
    _write_json(run.paths.report_dir / f"trials-{run.variant}.json", report.to_obj())
    _write_json(
        run.paths.report_dir / f"trials-{run.variant}-timing.json",
        {"wall_seconds": report.wall_seconds},
    )
    accs = ", ".join(f"{t.test_accuracy:.4f}" for t in report.trials)
    print(f"variant {run.variant}: accuracies [{accs}]")
    print(f"mean {report.mean:.4f} sd {report.sd:.4f}" + (" (single trial)" if report.single_trial else ""))
    return EXIT_OK


def cmd_ablate(args) -> int:
    run = load_run_config(args.config, None, args.seed)
    records = _load_corpus(run.paths.corpus)
    run.paths.report_dir.mkdir(parents=True, exist_ok=True)
    _freeze_config(run)
    reports = run_ablation(run.train, run.model, records, cache_dir=run.paths.cache_dir)
    combined = {variant: rep.to_obj() for variant, rep in reports.items()}
    _write_json(run.paths.report_dir / "ablation.json", combined)
    print(ablation_table(reports))
    return EXIT_OK


def cmd_predict(args) -> int:
    ck = load_checkpoint(args.checkpoint)
    records = _load_corpus(args.in_path)
    base = ck.vocab
    model_cfg = ck.model_config
    params = params_from_checkpoint(ck)
    out_path = Path(args.out) if args.out else None
    lines = []
    correct = 0
    labeled = 0
    batch_size = 64
    for start in range(0, len(records), batch_size):
        chunk = records[start : start + batch_size]
        encoded = [
            apply_variant(encode_graph(build_hdhg(r), base), model_cfg.variant, base)
            for r in chunk
        ]
        trace = forward(batch_graphs(encoded), params, model_cfg, train=False)
        for row, rec in enumerate(chunk):
            probs = trace.pred[row]
            pick = int(np.argmax(probs))
            lines.append(
                json.dumps(
                    {
                        "source_id": rec.source_id,
                        "pred_label": base.label_names[pick],
                        "probs": [float(p) for p in probs],
                    }
                )
            )
            if rec.label is not None:
                labeled += 1
                try:
                    if base.label_id(rec.label) == pick:
                        correct += 1
                except HdhgnError:
                    pass
    text = "".join(line + "\n" for line in lines)
    if out_path:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if labeled:
        print(f"accuracy: {correct / labeled:.4f} ({labeled} labeled graphs)")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    report = gradient_check(seed=args.seed)
    status = "PASS" if report.max_rel_err < GRADCHECK_THRESHOLD else "FAIL"
    print(
        f"{status} max_rel_err {report.max_rel_err:.3e} "
        f"({report.coords_checked} coordinates, worst {report.worst_param}, "
        f"{report.nodes}-node graph, {report.num_classes} classes)"
    )
    return EXIT_OK if status == "PASS" else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdhgn",
        description="Train and evaluate hypergraph networks over canonical ASTs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="encode a corpus file into a dataset cache + vocabulary")
    p.add_argument("--in", dest="in_path", required=True, help="canonical-AST JSONL corpus")
    p.add_argument("--out", required=True, help="output directory for cache and vocab")
    p.add_argument("--min-freq", type=int, default=2, help="identifier frequency cutoff")
    p.set_defaults(fn=cmd_build)

    for name, fn, needs_ckpt in (
        ("train", cmd_train, False),
        ("eval", cmd_eval, True),
        ("trials", cmd_trials, False),
        ("ablate", cmd_ablate, False),
    ):
        p = sub.add_parser(name, help=f"{name} per the run configuration")
        p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name != "ablate":
            p.add_argument(
                "--variant",
                default=None,
                choices=["full", "no_hyperedge", "no_hetero", "no_direction"],
                help="override the config variant",
            )
        if needs_ckpt:
            p.add_argument("--checkpoint", default=None, help="checkpoint path (default: config)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("predict", help="classify canonical-AST records with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="in_path", required=True, help="canonical-AST JSONL input")
    p.add_argument("--out", default=None, help="predictions JSONL (default: stdout)")
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("gradcheck", help="finite-difference verification of model gradients")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SchemaError, MalformedAst) as err:
        print(f"schema error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingAborted as err:
        print(f"training aborted: {err}", file=sys.stderr)
        return EXIT_TRAINING
    except VocabMismatch as err:
        print(f"vocabulary mismatch: {err}", file=sys.stderr)
        return EXIT_VOCAB
    except cache.CacheError as err:
        print(f"cache error: {err}", file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
