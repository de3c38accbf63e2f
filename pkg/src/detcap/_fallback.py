"""Pure NumPy versions of the compiled kernels.

Both kernels work on a batch of ``R`` configurations at once.

``grouped_esm`` returns the normalized elementary symmetric means of a
multiset of weights given as (value, count) groups, i.e. the expectation of
``prod(w[x_1..x_j])`` over a uniformly random ordered j-tuple of *distinct*
items. Groups are merged one at a time with hypergeometric weights, so every
update is a convex combination and nothing overflows. With ``hvals`` it also
returns the derivative channel ``D_j = E[w(x_1)...w(x_{j-1}) h(x_j)]``.

``weighted_alpha_means`` averages running products ``prod_{t<=j} q[pi(t)]``
over an explicit weighted list of schemes.
"""

from __future__ import annotations

import numpy as np

BACKEND = "fallback"

_ROW_BUDGET = 2_000_000


def _lchoose(lf, a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    ok = (b >= 0) & (b <= a)
    bb = np.where(ok, b, 0)
    ab = np.where(ok, a - b, 0)
    return np.where(ok, lf[a] - lf[bb] - lf[ab], -np.inf)


def grouped_esm(values, counts, jmax, logfact, hvals=None):
    values = np.ascontiguousarray(values, dtype=np.float64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    R, L = values.shape
    E = np.zeros((R, jmax + 1))
    D = np.zeros((R, jmax + 1))
    E[:, 0] = 1.0
    M = np.zeros(R, dtype=np.int64)
    has_h = hvals is not None
    for l in range(L):
        c = counts[:, l]
        if not np.any(c > 0):
            continue
        g = values[:, l]
        h = hvals[:, l] if has_h else None
        kmax = min(int(c.max()), jmax)
        pw = g[:, None] ** np.arange(jmax + 1)
        newE = np.zeros_like(E)
        newD = np.zeros_like(D)
        newE[:, 0] = 1.0
        for j in range(1, jmax + 1):
            lden = _lchoose(logfact, M + c, j)
            for k in range(0, min(j, kmax) + 1):
                with np.errstate(invalid="ignore"):
                    logH = _lchoose(logfact, c, k) + _lchoose(logfact, M, j - k) - lden
                H = np.exp(np.where(np.isfinite(logH), logH, -np.inf))
                newE[:, j] += H * pw[:, k] * E[:, j - k]
                if has_h:
                    term = H * pw[:, k] * (j - k) * D[:, j - k]
                    if k > 0:
                        term = term + H * k * pw[:, k - 1] * h * E[:, j - k]
                    newD[:, j] += term / j
        skip = c <= 0
        newE[skip] = E[skip]
        newD[skip] = D[skip]
        E, D = newE, newD
        M = M + c
    return E, D


def weighted_alpha_means(schemes, weights, q):
    schemes = np.ascontiguousarray(schemes, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    S, r = schemes.shape
    R = q.shape[0]
    out = np.empty((R, r + 1))
    out[:, 0] = weights.sum()
    step = max(1, _ROW_BUDGET // max(1, S * r))
    for lo in range(0, R, step):
        block = q[lo:lo + step]
        prods = np.cumprod(block[:, schemes], axis=2)
        out[lo:lo + step, 1:] = np.einsum("s,rst->rt", weights, prods)
    return out
