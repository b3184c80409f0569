"""Dense tensor engine with reverse-mode automatic differentiation.

Tensors wrap numpy arrays (float32 by default, float64 for verification).
Primitives applied while a Tape is active append (output, backward-rule)
records; Tape.backward replays the records in reverse, accumulating into
`.grad` of every tensor that requires gradients. Shared parameters therefore
accumulate (+=) across uses.

Segment operations take an int segment-id array aligned with the first axis
and an explicit segment count; ids must be grouped (non-decreasing) only for
readability of callers, the ops themselves accept any grouping.
"""

from __future__ import annotations

import threading

import numpy as np

from . import _kernels
from .errors import LabelOutOfRange, NonFiniteValue, ShapeMismatch

_state = threading.local()

_DEBUG_CHECKS = False


def set_debug_checks(enabled: bool) -> None:
    """Toggle NaN/Inf detection on every primitive output (slow; debugging)."""
    global _DEBUG_CHECKS
    _DEBUG_CHECKS = enabled


def _tapes() -> list["Tape"]:
    if not hasattr(_state, "tapes"):
        _state.tapes = []
    return _state.tapes


def _active_tape() -> "Tape | None":
    tapes = _tapes()
    return tapes[-1] if tapes else None


class Tensor:
    """A dense array plus an optional gradient accumulator."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data: np.ndarray, requires_grad: bool = False):
        self.data = data
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def accum_grad(self, g: np.ndarray) -> None:
        # g may alias another tensor's buffer: copy on first touch
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype)
        else:
            self.grad += g

    def accum_grad_owned(self, g: np.ndarray) -> None:
        # caller guarantees g is freshly allocated and un-aliased
        if self.grad is None:
            self.grad = g
        else:
            self.grad += g

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)


class Tape:
    """Ordered record of primitive applications for one backward sweep.

    Records are appended in execution order, which is a topological order of
    the value graph, so one reverse pass visits each exactly once.
    """

    def __init__(self):
        self._records: list[tuple[Tensor, object]] = []

    def __enter__(self) -> "Tape":
        _tapes().append(self)
        return self

    def __exit__(self, *exc) -> None:
        popped = _tapes().pop()
        assert popped is self

    def _record(self, out: Tensor, backward) -> None:
        self._records.append((out, backward))

    def backward(self, loss: Tensor) -> None:
        """Populate .grad for every tensor `loss` depends on."""
        if loss.data.ndim != 0:
            raise ShapeMismatch(f"backward needs a scalar loss, got shape {loss.shape}")
        loss.accum_grad(np.ones_like(loss.data))
        for out, rule in reversed(self._records):
            if out.grad is not None:
                rule(out.grad)


def tensor(data, requires_grad: bool = False, dtype=None) -> Tensor:
    arr = np.asarray(data, dtype=dtype)
    if arr.dtype not in (np.float32, np.float64):
        arr = arr.astype(np.float32)
    return Tensor(arr, requires_grad=requires_grad)


def parameter(data) -> Tensor:
    return Tensor(np.asarray(data), requires_grad=True)


def grad_or_zeros(t: Tensor) -> np.ndarray:
    """Gradient of `t`, treating never-touched parameters as zero."""
    return t.grad if t.grad is not None else np.zeros_like(t.data)


def _needs_grad(*xs) -> bool:
    return any(isinstance(x, Tensor) and x.requires_grad for x in xs)


def _make(data: np.ndarray, backward, *inputs) -> Tensor:
    if _DEBUG_CHECKS and not np.all(np.isfinite(data)):
        raise NonFiniteValue("non-finite value in primitive output")
    tape = _active_tape()
    out = Tensor(data, requires_grad=tape is not None and _needs_grad(*inputs))
    if out.requires_grad:
        tape._record(out, backward)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> tuple[np.ndarray, bool]:
    """Sum-reduce a gradient back to the pre-broadcast operand shape.

    Also reports whether the result is freshly allocated (safe to donate).
    """
    owned = False
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
        owned = True
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
        owned = True
    return g, owned


def _accum_unbroadcast(t: Tensor, g: np.ndarray, fresh: bool) -> None:
    reduced, owned = _unbroadcast(g, t.shape)
    if owned or fresh:
        t.accum_grad_owned(reduced)
    else:
        t.accum_grad(reduced)


# ------------------------------------------------------------------ arithmetic


def add(a: Tensor, b) -> Tensor:
    if isinstance(b, Tensor):
        data = a.data + b.data

        def bwd(g):
            if a.requires_grad:
                _accum_unbroadcast(a, g, fresh=False)
            if b.requires_grad:
                _accum_unbroadcast(b, g, fresh=False)

        return _make(data, bwd, a, b)
    scalar = float(b)

    def bwd_s(g):
        if a.requires_grad:
            a.accum_grad(g)

    return _make(a.data + scalar, bwd_s, a)


def neg(a: Tensor) -> Tensor:
    def bwd(g):
        if a.requires_grad:
            a.accum_grad(-g)

    return _make(-a.data, bwd, a)


def sub(a: Tensor, b) -> Tensor:
    if isinstance(b, Tensor):
        data = a.data - b.data

        def bwd(g):
            if a.requires_grad:
                _accum_unbroadcast(a, g, fresh=False)
            if b.requires_grad:
                _accum_unbroadcast(b, -g, fresh=True)

        return _make(data, bwd, a, b)
    return add(a, -float(b))


def mul(a: Tensor, b) -> Tensor:
    if isinstance(b, Tensor):
        data = a.data * b.data

        def bwd(g):
            if a.requires_grad:
                _accum_unbroadcast(a, g * b.data, fresh=True)
            if b.requires_grad:
                _accum_unbroadcast(b, g * a.data, fresh=True)

        return _make(data, bwd, a, b)
    scalar = float(b)

    def bwd_s(g):
        if a.requires_grad:
            a.accum_grad_owned(g * scalar)

    return _make(a.data * scalar, bwd_s, a)


def div(a: Tensor, b) -> Tensor:
    if isinstance(b, Tensor):
        data = a.data / b.data

        def bwd(g):
            if a.requires_grad:
                _accum_unbroadcast(a, g / b.data, fresh=True)
            if b.requires_grad:
                _accum_unbroadcast(b, -g * a.data / (b.data * b.data), fresh=True)

        return _make(data, bwd, a, b)
    return mul(a, 1.0 / float(b))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}")
    data = a.data @ b.data

    def bwd(g):
        if a.requires_grad:
            a.accum_grad_owned(g @ b.data.T)
        if b.requires_grad:
            b.accum_grad_owned(a.data.T @ g)

    return _make(data, bwd, a, b)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """Affine map over rows: x @ w (+ b)."""
    out = matmul(x, w)
    return add(out, b) if b is not None else out


# ------------------------------------------------------------------ elementwise


def exp(a: Tensor) -> Tensor:
    data = np.exp(a.data)

    def bwd(g):
        if a.requires_grad:
            a.accum_grad_owned(g * data)

    return _make(data, bwd, a)


def log(a: Tensor) -> Tensor:
    data = np.log(a.data)

    def bwd(g):
        if a.requires_grad:
            a.accum_grad_owned(g / a.data)

    return _make(data, bwd, a)


def sqrt(a: Tensor) -> Tensor:
    data = np.sqrt(a.data)

    def bwd(g):
        if a.requires_grad:
            a.accum_grad_owned(g * 0.5 / data)

    return _make(data, bwd, a)


def elu(a: Tensor) -> Tensor:
    """elu(x) = x for x > 0, exp(x) - 1 otherwise."""
    neg = a.data <= 0
    data = a.data.copy()
    data[neg] = np.expm1(a.data[neg])

    def bwd(g):
        if a.requires_grad:
            slope = np.ones_like(data)
            slope[neg] = data[neg] + 1.0
            a.accum_grad_owned(g * slope)

    return _make(data, bwd, a)


# ------------------------------------------------------------------ structure


def reshape(a: Tensor, shape) -> Tensor:
    data = a.data.reshape(shape)

    def bwd(g):
        if a.requires_grad:
            a.accum_grad(g.reshape(a.shape))

    return _make(data, bwd, a)


def concat_rows(parts: list[Tensor]) -> Tensor:
    data = np.concatenate([p.data for p in parts], axis=0)
    offsets = np.cumsum([0] + [p.shape[0] for p in parts])

    def bwd(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                p.accum_grad(g[lo:hi])

    return _make(data, bwd, *parts)


def gather_rows(a: Tensor, idx: np.ndarray) -> Tensor:
    """Row lookup by integer index (embedding gather); grads scatter-add."""
    idx = np.asarray(idx)
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[0]):
        raise ShapeMismatch(f"gather_rows: index out of range for {a.shape[0]} rows")
    data = a.data[idx]

    def bwd(g):
        if a.requires_grad:
            a.accum_grad_owned(scatter_add_rows(a.shape, idx, g))

    return _make(data, bwd, a)


def reduce_sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if not a.requires_grad:
            return
        if axis is None:
            a.accum_grad_owned(np.full(a.shape, g, dtype=a.dtype))
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        a.accum_grad_owned(np.broadcast_to(g, a.shape).copy())

    return _make(data, bwd, a)


# ------------------------------------------------------------------ segments


def _check_segments(rows: int, seg: np.ndarray, num_segments: int) -> np.ndarray:
    seg = np.asarray(seg)
    if seg.ndim != 1 or seg.shape[0] != rows:
        raise ShapeMismatch(f"segment ids: expected ({rows},), got {seg.shape}")
    if seg.size and (seg.min() < 0 or seg.max() >= num_segments):
        raise ShapeMismatch("segment id out of range")
    return seg


def _segment_reduce(op, data: np.ndarray, seg: np.ndarray, num_segments: int, fill=0.0):
    """Per-segment reduction (sum or max) via the scatter kernels."""
    out = np.full((num_segments,) + data.shape[1:], fill, dtype=data.dtype)
    if data.shape[0] == 0:
        return out
    if op is np.add:
        _kernels.scatter_add(out, seg, data)
    else:
        _kernels.scatter_max(out, seg, data)
    return out


def scatter_add_rows(shape: tuple, idx: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Freshly allocated dense array with g's rows scatter-added at idx."""
    out = np.zeros(shape, dtype=g.dtype)
    if idx.size:
        _kernels.scatter_add(out, idx, g)
    return out


def segment_sum(a: Tensor, seg: np.ndarray, num_segments: int) -> Tensor:
    seg = _check_segments(a.shape[0], seg, num_segments)
    data = _segment_reduce(np.add, a.data, seg, num_segments)

    def bwd(g):
        if a.requires_grad:
            a.accum_grad_owned(g[seg])

    return _make(data, bwd, a)


def segment_mean(a: Tensor, seg: np.ndarray, num_segments: int) -> Tensor:
    seg = _check_segments(a.shape[0], seg, num_segments)
    counts = np.bincount(seg, minlength=num_segments).astype(a.dtype)
    counts = np.maximum(counts, 1)  # empty segments stay all-zero
    denom = counts.reshape((num_segments,) + (1,) * (a.data.ndim - 1))
    data = _segment_reduce(np.add, a.data, seg, num_segments)
    data /= denom

    def bwd(g):
        if a.requires_grad:
            a.accum_grad_owned((g / denom)[seg])

    return _make(data, bwd, a)


def segment_softmax(scores: Tensor, seg: np.ndarray, num_segments: int) -> Tensor:
    """Softmax normalised independently within each segment, per column.

    Scores are [rows, heads]; rows of the same segment id form one softmax
    group in every head. Max-subtraction keeps the exponentials stable.
    """
    seg = _check_segments(scores.shape[0], seg, num_segments)
    highest = _segment_reduce(np.maximum, scores.data, seg, num_segments, fill=-np.inf)
    z = np.exp(scores.data - highest[seg])
    denom = _segment_reduce(np.add, z, seg, num_segments)
    alpha = z / denom[seg]

    def bwd(g):
        if not scores.requires_grad:
            return
        weighted = alpha * g
        seg_dot = _segment_reduce(np.add, weighted, seg, num_segments)
        scores.accum_grad_owned(weighted - alpha * seg_dot[seg])

    return _make(alpha, bwd, scores)


def segment_weighted_sum(
    values: Tensor, weights: Tensor, seg: np.ndarray, num_segments: int
) -> Tensor:
    """out[s, h, :] = sum over rows i with seg[i] == s of weights[i, h] * values[i, h, :]."""
    seg = _check_segments(values.shape[0], seg, num_segments)
    if values.data.ndim != 3 or weights.data.ndim != 2 or values.shape[:2] != weights.shape:
        raise ShapeMismatch(
            f"segment_weighted_sum: values {values.shape} vs weights {weights.shape}"
        )
    contrib = values.data * weights.data[:, :, None]
    data = _segment_reduce(np.add, contrib, seg, num_segments)

    def bwd(g):
        picked = g[seg]
        if values.requires_grad:
            values.accum_grad_owned(picked * weights.data[:, :, None])
        if weights.requires_grad:
            weights.accum_grad_owned((picked * values.data).sum(axis=2))

    return _make(data, bwd, values, weights)


# ------------------------------------------------------------------ stochastic


def dropout(a: Tensor, p: float, rng: np.random.Generator, train: bool) -> Tensor:
    """Inverted dropout; identity when not training or p == 0."""
    if not train or p == 0.0:
        return a
    mask = (rng.random(a.shape) >= p).astype(a.dtype) / (1.0 - p)

    def bwd(g):
        if a.requires_grad:
            a.accum_grad_owned(g * mask)

    return _make(a.data * mask, bwd, a)


# ------------------------------------------------------------------ composites


def graph_norm(
    x: Tensor,
    graph_ids: np.ndarray,
    num_graphs: int,
    shift: Tensor,
    gain: Tensor,
    bias: Tensor,
    eps: float = 1e-5,
) -> Tensor:
    """Per-graph feature normalisation with learnable mean-scale, gain, shift.

    out = gain * (x - shift * mean_g) / sqrt(var_g + eps) + bias, where the
    statistics are taken over the nodes of each graph and var_g is the second
    moment of the shift-centred values.
    """
    mean = segment_mean(x, graph_ids, num_graphs)
    centered = sub(x, mul(gather_rows(mean, graph_ids), shift))
    var = segment_mean(mul(centered, centered), graph_ids, num_graphs)
    std = sqrt(add(var, eps))
    normed = div(centered, gather_rows(std, graph_ids))
    return add(mul(normed, gain), bias)


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of `labels` under softmax(logits) rows."""
    labels = np.asarray(labels)
    n, k = logits.shape
    if labels.shape != (n,):
        raise ShapeMismatch(f"labels shape {labels.shape} for logits {logits.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise LabelOutOfRange(f"labels must lie in [0, {k})")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logz
    data = np.asarray(-logp[np.arange(n), labels].mean(), dtype=logits.dtype)

    def bwd(g):
        if logits.requires_grad:
            grad = np.exp(logp)
            grad[np.arange(n), labels] -= 1.0
            logits.accum_grad_owned(grad * (g / n))

    return _make(data, bwd, logits)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Plain numpy row softmax (for reporting predictions; not differentiable)."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    z = np.exp(shifted)
    return z / z.sum(axis=1, keepdims=True)
