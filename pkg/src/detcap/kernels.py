"""Kernel dispatch: the compiled extension when importable, NumPy otherwise.

Set ``DETCAP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import functools
import math
import os

import numpy as np

from . import _fallback

_compiled = None
if not os.environ.get("DETCAP_PURE_PYTHON"):
    try:
        from . import _core as _compiled
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _fallback
BACKEND: str = _impl.BACKEND


def available_backends() -> list[str]:
    names = ["fallback"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name: str | None = None):
    if name is None:
        return _impl
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    if name == "fallback":
        return _fallback
    raise ValueError(f"unknown backend {name!r}")


@functools.lru_cache(maxsize=8)
def log_factorials(nmax: int) -> np.ndarray:
    lf = np.array([math.lgamma(i + 1.0) for i in range(nmax + 1)])
    lf.setflags(write=False)
    return lf


def grouped_esm(values, counts, jmax: int, hvals=None, backend: str | None = None):
    """Elementary symmetric means of grouped weights, one row per configuration.

    Returns ``(E, D)`` with shape ``(R, jmax + 1)``. ``D`` is all zeros unless
    ``hvals`` is given.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if values.ndim == 1:
        values = values[None, :]
        counts = counts[None, :]
    if hvals is not None:
        hvals = np.ascontiguousarray(np.broadcast_to(hvals, values.shape), dtype=np.float64)
    total = int(counts.sum(axis=1).max()) if counts.size else 0
    lf = log_factorials(max(total, jmax, 1))
    return get_backend(backend).grouped_esm(values, counts, int(jmax), lf, hvals)


def weighted_alpha_means(schemes, weights, q, backend: str | None = None) -> np.ndarray:
    """Weighted mean of running products ``q[pi(1)]...q[pi(j)]`` for j = 0..r.

    ``schemes`` holds 0-based detector indices, shape ``(S, r)``; ``q`` has
    shape ``(R, n)``. Returns ``(R, r + 1)``.
    """
    schemes = np.ascontiguousarray(schemes, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.ndim == 1:
        q = q[None, :]
    if schemes.size and (schemes.min() < 0 or schemes.max() >= q.shape[1]):
        raise IndexError("scheme index out of range for configuration")
    return get_backend(backend).weighted_alpha_means(schemes, weights, q)
