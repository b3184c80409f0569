"""Experiment protocol: repeated trials, ablations, gradient verification."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import tensor as T
from .batching import batch_graphs
from .encode import VARIANTS
from .model import ModelConfig, forward, init_parameters
from .rng import stream
from .synthetic import random_encoded_graph, synthetic_vocab
from .training import TrainConfig, TrainOutcome, evaluate, train


def mean_sd(values) -> tuple[float, float]:
    """Mean and sample standard deviation (n-1 denominator; 0 for n == 1)."""
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, sd


def _strip_timing(curve: list) -> list:
    return [{k: v for k, v in rec.items() if k != "seconds"} for rec in curve]


@dataclass
class TrialResult:
    seed: int
    test_accuracy: float
    best_epoch: int
    best_val_accuracy: float | None
    curve: list  # per-epoch records without timing
    wall_seconds: float

    def to_obj(self) -> dict:
        return {
            "seed": self.seed,
            "test_accuracy": self.test_accuracy,
            "best_epoch": self.best_epoch,
            "best_val_accuracy": self.best_val_accuracy,
            "curve": self.curve,
        }


@dataclass
class TrialReport:
    variant: str
    trials: list
    mean: float
    sd: float
    single_trial: bool
    wall_seconds: float

    def to_obj(self, include_timing: bool = False) -> dict:
        obj = {
            "variant": self.variant,
            "trials": [t.to_obj() for t in self.trials],
            "test_accuracies": [t.test_accuracy for t in self.trials],
            "mean": self.mean,
            "sd": self.sd,
            "single_trial": self.single_trial,
        }
        if include_timing:
            obj["wall_seconds"] = self.wall_seconds
        return obj


def run_trials(
    train_cfg: TrainConfig,
    model_cfg: ModelConfig,
    records,
    cache_dir=None,
    on_trial=None,
) -> TrialReport:
    """Repeat the experiment `trials` times; trial i re-splits and trains
    with seed = base_seed + i. Reports per-trial accuracy, mean, sample sd."""
    started = time.perf_counter()
    results = []
    for i in range(train_cfg.trials):
        cfg_i = replace(train_cfg, seed=train_cfg.seed + i)
        outcome: TrainOutcome = train(cfg_i, model_cfg, records, cache_dir=cache_dir)
        accuracy = evaluate(outcome.checkpoint, outcome.encoded_test)
        result = TrialResult(
            seed=cfg_i.seed,
            test_accuracy=accuracy,
            best_epoch=outcome.checkpoint.meta["best_epoch"],
            best_val_accuracy=outcome.checkpoint.meta["best_val_accuracy"],
            curve=_strip_timing(outcome.curve),
            wall_seconds=outcome.wall_seconds,
        )
        results.append(result)
        if on_trial is not None:
            on_trial(i, outcome, result)
    mean, sd = mean_sd([r.test_accuracy for r in results])
    return TrialReport(
        variant=train_cfg.variant,
        trials=results,
        mean=mean,
        sd=sd,
        single_trial=train_cfg.trials == 1,
        wall_seconds=time.perf_counter() - started,
    )


def run_ablation(
    train_cfg: TrainConfig,
    model_cfg: ModelConfig,
    records,
    variants=VARIANTS,
    cache_dir=None,
    on_trial=None,
) -> dict:
    """One TrialReport per variant, all on identical per-trial splits/seeds."""
    reports = {}
    for variant in variants:
        cfg_t = replace(train_cfg, variant=variant)
        cfg_m = replace(model_cfg, variant=variant)
        reports[variant] = run_trials(
            cfg_t, cfg_m, records, cache_dir=cache_dir, on_trial=on_trial
        )
    return reports


def ablation_table(reports: dict) -> str:
    """Aligned text table of per-variant mean/sd accuracies."""
    rows = [("variant", "mean", "sd", "trials")]
    for variant, rep in reports.items():
        rows.append((variant, f"{rep.mean:.4f}", f"{rep.sd:.4f}", str(len(rep.trials))))
    widths = [max(len(r[c]) for r in rows) for c in range(4)]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)))
        if i == 0:
            lines.append("  ".join("-" * widths[c] for c in range(4)))
    return "\n".join(lines)


@dataclass
class GradCheckReport:
    max_rel_err: float
    coords_checked: int
    worst_param: str
    nodes: int
    num_classes: int

    @property
    def passed(self) -> bool:
        return self.max_rel_err < 1e-4


def _rel_err(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-3)


def gradient_check(
    model_cfg: ModelConfig | None = None,
    seed: int = 0,
    step: float = 1e-4,
    min_coords: int = 200,
) -> GradCheckReport:
    """Compare tape gradients against central finite differences in float64.

    Builds a random tree of at most 12 nodes and a 2-4 class head, then
    probes a random subsample of coordinates spread over every parameter
    tensor (at least `min_coords` overall). The step 1e-4 keeps the O(h^2)
    truncation of the difference quotient far below the 1e-4 error gate.
    """
    rng = stream(seed, "gradcheck")
    num_classes = int(rng.integers(2, 5))
    if model_cfg is None:
        cfg = ModelConfig(
            num_classes=num_classes,
            layers=2,
            embed_dim=12,
            hidden_dim=12,
            heads=2,
            dropout=0.0,
        )
    else:
        cfg = replace(
            model_cfg,
            dropout=0.0,
            num_classes=model_cfg.num_classes if model_cfg.num_classes > 0 else num_classes,
        )
    vocab = synthetic_vocab(num_classes=cfg.num_classes)
    nodes = int(rng.integers(5, 13))
    graph = random_encoded_graph(rng, vocab, nodes)
    batch = batch_graphs([graph])
    params = init_parameters(cfg, vocab, seed).astype(np.float64)

    def loss_value() -> float:
        trace = forward(batch, params, cfg, train=False)
        return float(T.cross_entropy(trace.logits, batch.labels).data)

    params.zero_grad()
    with T.Tape() as tape:
        trace = forward(batch, params, cfg, train=False)
        loss = T.cross_entropy(trace.logits, batch.labels)
    tape.backward(loss)

    names = params.names()
    per_tensor = max(1, math.ceil(min_coords / len(names)))
    worst = 0.0
    worst_param = ""
    checked = 0
    for name in names:
        t = params.tensors[name]
        flat = t.data.reshape(-1)
        grad = T.grad_or_zeros(t).reshape(-1)
        k = min(per_tensor, flat.size)
        for idx in rng.choice(flat.size, size=k, replace=False):
            keep = flat[idx]
            flat[idx] = keep + step
            up = loss_value()
            flat[idx] = keep - step
            down = loss_value()
            flat[idx] = keep
            numeric = (up - down) / (2.0 * step)
            err = _rel_err(float(grad[idx]), numeric)
            checked += 1
            if err > worst:
                worst = err
                worst_param = name
    return GradCheckReport(
        max_rel_err=worst,
        coords_checked=checked,
        worst_param=worst_param,
        nodes=nodes,
        num_classes=cfg.num_classes,
    )
