"""Scatter kernels behind the segment operations.

numpy's ufunc.at / reduceat are an order of magnitude too slow for the
per-step scatter volume of training, so the hot loops are JIT-compiled with
numba when available (serial loops: deterministic accumulation order). The
pure-numpy fallback keeps the package usable without a working JIT.
"""

from __future__ import annotations

import numpy as np

try:
    import numba

    @numba.njit(cache=True)
    def _scatter_add_2d(out, idx, data):  # pragma: no cover - jitted
        for i in range(idx.shape[0]):
            s = idx[i]
            for j in range(data.shape[1]):
                out[s, j] += data[i, j]

    @numba.njit(cache=True)
    def _scatter_max_2d(out, idx, data):  # pragma: no cover - jitted
        for i in range(idx.shape[0]):
            s = idx[i]
            for j in range(data.shape[1]):
                if data[i, j] > out[s, j]:
                    out[s, j] = data[i, j]

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def _as_2d(arr: np.ndarray) -> np.ndarray:
    flat = arr.reshape(arr.shape[0], -1)
    return flat if flat.flags.c_contiguous else np.ascontiguousarray(flat)


def scatter_add(out: np.ndarray, idx: np.ndarray, data: np.ndarray) -> np.ndarray:
    """out[idx[i]] += data[i] row-wise; repeated indices accumulate.

    `out` must be freshly allocated (C-contiguous) by the caller.
    """
    if data.shape[0] == 0:
        return out
    if HAVE_NUMBA and out.flags.c_contiguous and out.dtype == data.dtype:
        _scatter_add_2d(out.reshape(out.shape[0], -1), np.asarray(idx, dtype=np.int64), _as_2d(data))
    else:
        np.add.at(out, idx, data)
    return out


def scatter_max(out: np.ndarray, idx: np.ndarray, data: np.ndarray) -> np.ndarray:
    """out[idx[i]] = max(out[idx[i]], data[i]) row-wise."""
    if data.shape[0] == 0:
        return out
    if HAVE_NUMBA and out.flags.c_contiguous and out.dtype == data.dtype:
        _scatter_max_2d(out.reshape(out.shape[0], -1), np.asarray(idx, dtype=np.int64), _as_2d(data))
    else:
        np.maximum.at(out, idx, data)
    return out
