"""Run configuration: one JSON file driving training, evaluation, ablation.

Schema (unknown keys anywhere are rejected):

{
  "seed": int,
  "variant": "full" | "no_hyperedge" | "no_hetero" | "no_direction",
  "model": {"layers", "embed_dim", "hidden_dim", "heads", "dropout",
             "num_classes" (0 = derive from data)},
  "train": {"epochs", "batch_size", "learning_rate", "trials",
             "split_ratios", "min_identifier_freq", "stratify",
             "report_every"},
  "paths": {"corpus", "cache_dir", "checkpoint", "report_dir"}
}

The HDHGN_CACHE_DIR environment variable overrides paths.cache_dir.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .encode import VARIANTS
from .errors import ConfigError
from .model import ModelConfig
from .training import TrainConfig

_MODEL_KEYS = {"layers", "embed_dim", "hidden_dim", "heads", "dropout", "num_classes"}
_TRAIN_KEYS = {
    "epochs",
    "batch_size",
    "learning_rate",
    "trials",
    "split_ratios",
    "min_identifier_freq",
    "stratify",
    "report_every",
}
_PATH_KEYS = {"corpus", "cache_dir", "checkpoint", "report_dir"}
_TOP_KEYS = {"seed", "variant", "model", "train", "paths"}


@dataclass
class RunPaths:
    corpus: Path
    cache_dir: Path | None
    checkpoint: Path
    report_dir: Path


@dataclass
class RunConfig:
    seed: int
    variant: str
    model: ModelConfig
    train: TrainConfig
    paths: RunPaths

    def to_obj(self) -> dict:
        model = self.model.to_obj()
        model.pop("variant")
        train = self.train.to_obj()
        train.pop("variant")
        train.pop("seed")
        return {
            "seed": self.seed,
            "variant": self.variant,
            "model": model,
            "train": train,
            "paths": {
                "corpus": str(self.paths.corpus),
                "cache_dir": None if self.paths.cache_dir is None else str(self.paths.cache_dir),
                "checkpoint": str(self.paths.checkpoint),
                "report_dir": str(self.paths.report_dir),
            },
        }


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def load_run_config(
    path: str | Path,
    variant_override: str | None = None,
    seed_override: int | None = None,
) -> RunConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError:
        raise
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON ({err.msg})") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    _reject_unknown(obj, _TOP_KEYS, "config")
    for section, keys in (("model", _MODEL_KEYS), ("train", _TRAIN_KEYS), ("paths", _PATH_KEYS)):
        if section in obj:
            if not isinstance(obj[section], dict):
                raise ConfigError(f"{path}: {section} must be an object")
            _reject_unknown(obj[section], keys, section)

    seed = seed_override if seed_override is not None else int(obj.get("seed", 0))
    variant = variant_override or obj.get("variant", "full")
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")

    try:
        model = ModelConfig(variant=variant, **obj.get("model", {}), )
    except (TypeError, ValueError) as err:
        raise ConfigError(f"model config: {err}") from None
    train_obj = dict(obj.get("train", {}))
    if "split_ratios" in train_obj:
        train_obj["split_ratios"] = tuple(train_obj["split_ratios"])
    try:
        train = TrainConfig(variant=variant, seed=seed, **train_obj)
    except (TypeError, ConfigError) as err:
        raise ConfigError(f"train config: {err}") from None

    paths_obj = obj.get("paths", {})
    for key in ("corpus", "checkpoint", "report_dir"):
        if key not in paths_obj:
            raise ConfigError(f"paths.{key} is required")
    cache_dir = os.environ.get("HDHGN_CACHE_DIR") or paths_obj.get("cache_dir")
    paths = RunPaths(
        corpus=Path(paths_obj["corpus"]),
        cache_dir=None if cache_dir is None else Path(cache_dir),
        checkpoint=Path(paths_obj["checkpoint"]),
        report_dir=Path(paths_obj["report_dir"]),
    )
    if not paths.corpus.exists():
        raise ConfigError(f"corpus file not found: {paths.corpus}")
    return RunConfig(seed=seed, variant=variant, model=model, train=train, paths=paths)
