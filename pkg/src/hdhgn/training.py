"""Dataset splitting, the minibatch training loop, and evaluation."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import cache
from .batching import batch_graphs
from .checkpoint import Checkpoint, params_from_checkpoint
from .encode import EncodedGraph, apply_variant, encode_graph, variant_vocab
from .errors import ConfigError, EmptyDataset, TrainingAborted, VocabMismatch
from .graphs import build_hdhg
from .model import ModelConfig, Parameters, forward, init_parameters, loss_and_grad
from .optim import Adam
from .rng import stream
from .vocab import Vocab, build_vocab

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 5e-5
    trials: int = 5
    seed: int = 0
    split_ratios: tuple = (0.6, 0.2, 0.2)
    variant: str = "full"
    min_identifier_freq: int = 2
    stratify: bool = False
    report_every: int = 10  # epochs between progress log lines

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        total = sum(self.split_ratios)
        if total <= 0 or len(self.split_ratios) != 3:
            raise ConfigError("split_ratios must be three non-negative numbers")
        self.split_ratios = tuple(r / total for r in self.split_ratios)

    def to_obj(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "trials": self.trials,
            "seed": self.seed,
            "split_ratios": list(self.split_ratios),
            "variant": self.variant,
            "min_identifier_freq": self.min_identifier_freq,
            "stratify": self.stratify,
            "report_every": self.report_every,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "TrainConfig":
        obj = dict(obj)
        if "split_ratios" in obj:
            obj["split_ratios"] = tuple(obj["split_ratios"])
        return cls(**obj)


def split_dataset(records, ratios, seed: int, labels=None):
    """Deterministic shuffle + partition; remainder lands in train.

    With `labels` given the split is stratified per label (same remainder
    rule within every class).
    """
    n = len(records)
    if n == 0:
        raise EmptyDataset("cannot split an empty dataset")
    total = sum(ratios)
    r_val, r_test = ratios[1] / total, ratios[2] / total

    def partition(indices, rng):
        indices = rng.permutation(indices)
        n_val = int(len(indices) * r_val)
        n_test = int(len(indices) * r_test)
        n_train = len(indices) - n_val - n_test
        return (
            indices[:n_train],
            indices[n_train : n_train + n_val],
            indices[n_train + n_val :],
        )

    rng = stream(seed, "split")
    if labels is None:
        tr, va, te = partition(np.arange(n), rng)
    else:
        parts = ([], [], [])
        for lab in sorted(set(labels)):
            idx = np.flatnonzero(np.asarray(labels) == lab)
            for bucket, chunk in zip(parts, partition(idx, rng)):
                bucket.append(chunk)
        tr, va, te = (np.concatenate(p) if p else np.zeros(0, int) for p in parts)
    pick = lambda idx: [records[int(i)] for i in idx]
    return pick(tr), pick(va), pick(te)


@dataclass
class TrainOutcome:
    checkpoint: Checkpoint
    curve: list  # per-epoch dicts incl. timing
    vocab: Vocab  # base vocabulary from the train split
    encoded_train: list
    encoded_val: list
    encoded_test: list
    wall_seconds: float


def _encode_split(records, base_vocab: Vocab, variant: str, digest: str, cache_dir, tag: str):
    def encode_all():
        out = []
        for rec in records:
            enc = encode_graph(build_hdhg(rec), base_vocab)
            out.append(apply_variant(enc, variant, base_vocab))
        return out

    if cache_dir is None:
        return encode_all()
    path = Path(cache_dir) / f"{tag}-{digest[:16]}.hdgc"
    return cache.load_or_encode(path, digest, encode_all)


def _batches(encoded, order, batch_size):
    for start in range(0, len(order), batch_size):
        chunk = [encoded[int(i)] for i in order[start : start + batch_size]]
        yield batch_graphs(chunk)


def evaluate_params(params: Parameters, encoded, config: ModelConfig, batch_size: int = 64) -> float:
    """Accuracy under argmax prediction; argmax ties resolve to the lowest
    class id (first maximum). Deterministic: no dropout."""
    if not encoded:
        return float("nan")
    correct = total = 0
    for batch in _batches(encoded, np.arange(len(encoded)), batch_size):
        if np.any(batch.labels < 0):
            raise VocabMismatch("evaluation split contains unlabeled graphs")
        trace = forward(batch, params, config, train=False)
        pred = np.argmax(trace.logits.data, axis=1)
        correct += int((pred == batch.labels).sum())
        total += len(batch.labels)
    return correct / total


def evaluate(checkpoint: Checkpoint, encoded, batch_size: int = 64) -> float:
    """Evaluate a checkpoint on an encoded split (digest-checked)."""
    for g in encoded:
        if g.vocab_digest != checkpoint.vocab_digest:
            raise VocabMismatch(
                f"split digest {g.vocab_digest[:12]}... vs checkpoint "
                f"{checkpoint.vocab_digest[:12]}..."
            )
    params = params_from_checkpoint(checkpoint)
    return evaluate_params(params, encoded, checkpoint.model_config, batch_size)


def train(
    train_cfg: TrainConfig,
    model_cfg: ModelConfig,
    records,
    cache_dir=None,
    metrics_path=None,
) -> TrainOutcome:
    """Full training run: split, build train-split vocab, encode, optimise.

    The checkpoint keeps the parameters of the best-validation epoch (ties
    resolve to the earlier epoch). With no validation data (or epochs == 0)
    the final (resp. initial) parameters are kept.
    """
    started = time.perf_counter()
    if train_cfg.variant != model_cfg.variant:
        raise ConfigError(
            f"variant mismatch: train={train_cfg.variant!r} model={model_cfg.variant!r}"
        )
    variant = model_cfg.variant
    labels = [r.label for r in records] if train_cfg.stratify else None
    train_recs, val_recs, test_recs = split_dataset(
        records, train_cfg.split_ratios, train_cfg.seed, labels=labels
    )

    train_graphs = [build_hdhg(r) for r in train_recs]
    base_vocab = build_vocab(train_graphs, train_cfg.min_identifier_freq)
    model_vocab = variant_vocab(base_vocab, variant)
    digest = model_vocab.digest()
    if model_cfg.num_classes <= 0:
        model_cfg = replace(model_cfg, num_classes=len(base_vocab.label_names))

    tag = f"s{train_cfg.seed}"
    enc_train = [
        apply_variant(encode_graph(g, base_vocab), variant, base_vocab) for g in train_graphs
    ]
    enc_val = _encode_split(val_recs, base_vocab, variant, digest, cache_dir, f"val-{tag}")
    enc_test = _encode_split(test_recs, base_vocab, variant, digest, cache_dir, f"test-{tag}")
    if cache_dir is not None:
        path = Path(cache_dir) / f"train-{tag}-{digest[:16]}.hdgc"
        cache.load_or_encode(path, digest, lambda: enc_train)

    params = init_parameters(model_cfg, model_vocab, train_cfg.seed)
    opt = Adam(params.tensors, lr=train_cfg.learning_rate)
    shuffle_rng = stream(train_cfg.seed, "shuffle")
    dropout_rng = stream(train_cfg.seed, "dropout")

    def snapshot():
        return {n: params.tensors[n].data.copy() for n in params.names()}

    best = snapshot()  # epochs == 0 keeps the initial parameters
    best_val = -1.0
    best_epoch = 0
    curve = []
    metrics_fh = open(metrics_path, "w", encoding="utf-8") if metrics_path else None
    try:
        for epoch in range(1, train_cfg.epochs + 1):
            tick = time.perf_counter()
            order = shuffle_rng.permutation(len(enc_train))
            loss_sum = 0.0
            correct = 0
            for step, batch in enumerate(_batches(enc_train, order, train_cfg.batch_size)):
                out = loss_and_grad(batch, params, model_cfg, rng=dropout_rng)
                if not np.isfinite(out.loss):
                    raise TrainingAborted(
                        f"non-finite loss {out.loss} at epoch {epoch} step {step}"
                    )
                opt.step(out.grads)
                loss_sum += out.loss * len(batch.labels)
                correct += int((np.argmax(out.logits, axis=1) == batch.labels).sum())
            train_loss = loss_sum / len(enc_train)
            train_acc = correct / len(enc_train)
            val_acc = evaluate_params(params, enc_val, model_cfg) if enc_val else float("nan")
            seconds = time.perf_counter() - tick
            record = {
                "epoch": epoch,
                "train_loss": train_loss,
                "train_acc": train_acc,
                "val_acc": None if np.isnan(val_acc) else val_acc,
                "seconds": seconds,
            }
            curve.append(record)
            if metrics_fh:
                metrics_fh.write(json.dumps(record) + "\n")
                metrics_fh.flush()
            if epoch == 1 or epoch % max(1, train_cfg.report_every) == 0:
                log.info(
                    "epoch %d: loss %.4f, train acc %.3f, val acc %s",
                    epoch,
                    train_loss,
                    train_acc,
                    "n/a" if np.isnan(val_acc) else f"{val_acc:.3f}",
                )
            if enc_val and val_acc > best_val:
                best_val = val_acc
                best_epoch = epoch
                best = snapshot()
        if not enc_val and train_cfg.epochs > 0:
            best = snapshot()  # no validation data: keep the final parameters
            best_epoch = train_cfg.epochs
    finally:
        if metrics_fh:
            metrics_fh.close()

    best_params = Parameters(
        {n: params.tensors[n].__class__(best[n], requires_grad=True) for n in best},
        dict(params.aliases),
    )
    meta = {
        "best_epoch": best_epoch,
        "best_val_accuracy": None if best_val < 0 else best_val,
    }
    ck = Checkpoint.from_params(best_params, model_cfg, train_cfg.to_obj(), base_vocab, meta)
    return TrainOutcome(
        checkpoint=ck,
        curve=curve,
        vocab=base_vocab,
        encoded_train=enc_train,
        encoded_val=enc_val,
        encoded_test=enc_test,
        wall_seconds=time.perf_counter() - started,
    )
