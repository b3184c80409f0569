"""Adam optimizer over named parameter tensors."""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch
from .tensor import Tensor, grad_or_zeros


class Adam:
    """Adam with bias-corrected first/second moments.

    Keeps one (m, v) pair per parameter name and a single shared step
    counter; `step` consumes either an explicit gradient dict or the
    tensors' own `.grad` accumulators (missing gradients count as zero).
    """

    def __init__(
        self,
        params: dict[str, Tensor],
        lr: float = 5e-5,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self._v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self, grads: dict[str, np.ndarray] | None = None) -> None:
        self.t += 1
        correct1 = 1.0 - self.beta1**self.t
        correct2 = 1.0 - self.beta2**self.t
        for name, p in self.params.items():
            g = grads[name] if grads is not None else grad_or_zeros(p)
            if g.shape != p.data.shape:
                raise ShapeMismatch(f"grad for {name}: {g.shape} vs param {p.data.shape}")
            m, v = self._m[name], self._v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            m_hat = m / correct1
            v_hat = v / correct2
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None
