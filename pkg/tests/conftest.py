"""Shared test utilities, chiefly the central finite-difference oracle."""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from hdhgn import tensor as T


def fd_rel_err(analytic: float, numeric: float) -> float:
    """Relative error with an absolute floor for near-zero gradients."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-3)


def fd_max_rel_err(f, inputs, h: float = 1e-3, coords=None) -> float:
    """Central finite differences against tape gradients, worst coordinate.

    `f` maps the input tensors to a scalar Tensor and must be deterministic.
    Inputs must be float64 for the 1e-4 tolerance to be meaningful. When
    `coords` is given it limits, per input, how many coordinates are probed
    (uniformly chosen via the provided generator tuple (rng, n)).
    """
    for t in inputs:
        t.grad = None
    with T.Tape() as tape:
        loss = f(*inputs)
    tape.backward(loss)
    analytic = [np.array(T.grad_or_zeros(t)) for t in inputs]

    worst = 0.0
    for t, grad in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        if coords is None:
            probe = range(flat.size)
        else:
            rng, n = coords
            probe = rng.choice(flat.size, size=min(n, flat.size), replace=False)
        for i in probe:
            keep = flat[i]
            flat[i] = keep + h
            up = float(f(*inputs).data)
            flat[i] = keep - h
            down = float(f(*inputs).data)
            flat[i] = keep
            numeric = (up - down) / (2 * h)
            worst = max(worst, fd_rel_err(float(grad.reshape(-1)[i]), numeric))
    return worst
