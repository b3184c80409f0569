"""Versioned checkpoint container.

Layout: magic b"HDCK" | u32 version | u64 header length | header JSON (UTF-8,
sorted keys) | concatenated little-endian float32 arrays in the header's
parameter order. The header carries the model config, the training config
that produced the run, the full base vocabulary, the model-vocabulary digest
(what encoded data must match), and per-parameter shapes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encode import variant_vocab
from .errors import VocabMismatch
from .model import ModelConfig, Parameters, _tied_aliases
from .tensor import Tensor
from .vocab import Vocab

MAGIC = b"HDCK"
VERSION = 1


@dataclass
class Checkpoint:
    params: dict  # name -> float32 ndarray
    model_config: ModelConfig
    train_config: dict | None
    vocab: Vocab  # base vocabulary (pre-variant)
    vocab_digest: str  # digest of the model vocabulary (post-variant)
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_params(
        cls,
        params: Parameters,
        model_config: ModelConfig,
        train_config: dict | None,
        vocab: Vocab,
        meta: dict | None = None,
    ) -> "Checkpoint":
        arrays = {
            name: params.tensors[name].data.astype(np.float32).copy()
            for name in params.names()
        }
        digest = variant_vocab(vocab, model_config.variant).digest()
        return cls(
            params=arrays,
            model_config=model_config,
            train_config=train_config,
            vocab=vocab,
            vocab_digest=digest,
            meta=dict(meta or {}),
        )

    def model_vocab(self) -> Vocab:
        return variant_vocab(self.vocab, self.model_config.variant)


def params_from_checkpoint(ck: Checkpoint) -> Parameters:
    tensors = {
        name: Tensor(arr.astype(np.float32).copy(), requires_grad=True)
        for name, arr in ck.params.items()
    }
    return Parameters(tensors, _tied_aliases(ck.model_config))


def save_checkpoint(path: str | Path, ck: Checkpoint) -> None:
    names = sorted(ck.params)
    header = {
        "format_version": VERSION,
        "model_config": ck.model_config.to_obj(),
        "train_config": ck.train_config,
        "vocab": ck.vocab.to_obj(),
        "vocab_digest": ck.vocab_digest,
        "meta": ck.meta,
        "params": [{"name": n, "shape": list(ck.params[n].shape)} for n in names],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for n in names:
            fh.write(ck.params[n].astype("<f4").tobytes(order="C"))


def load_checkpoint(path: str | Path) -> Checkpoint:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16 or head[:4] != MAGIC:
            raise VocabMismatch(f"{path}: not a checkpoint file")
        (version,) = struct.unpack_from("<I", head, 4)
        if version != VERSION:
            raise VocabMismatch(f"{path}: unsupported checkpoint version {version}")
        (hlen,) = struct.unpack_from("<Q", head, 8)
        header = json.loads(fh.read(hlen).decode("utf-8"))
        model_config = ModelConfig.from_obj(header["model_config"])
        vocab = Vocab.from_obj(header["vocab"])
        params = {}
        for entry in header["params"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(4 * count)
            if len(raw) != 4 * count:
                raise VocabMismatch(f"{path}: truncated parameter payload")
            params[entry["name"]] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    ck = Checkpoint(
        params=params,
        model_config=model_config,
        train_config=header.get("train_config"),
        vocab=vocab,
        vocab_digest=header["vocab_digest"],
        meta=header.get("meta", {}),
    )
    expected = ck.model_vocab().digest()
    if expected != ck.vocab_digest:
        raise VocabMismatch(
            f"{path}: stored digest {ck.vocab_digest[:12]}... does not match "
            f"embedded vocabulary digest {expected[:12]}..."
        )
    return ck
