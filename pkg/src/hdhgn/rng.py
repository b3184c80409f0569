"""Seeded, splittable random streams.

One master seed derives independent, reproducible generators for each use
site (parameter init, dropout, shuffling, ...). Streams are keyed by string
labels hashed with SHA-256 so the derivation is stable across platforms and
Python versions.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_entropy(label: str | int) -> int:
    digest = hashlib.sha256(str(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, *labels: str | int) -> np.random.Generator:
    """Return a generator for `seed` specialised by the given labels."""
    entropy = [seed & 0xFFFFFFFFFFFFFFFF] + [_label_entropy(l) for l in labels]
    return np.random.default_rng(np.random.SeedSequence(entropy))
