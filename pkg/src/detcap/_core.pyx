# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Mirrors :mod:`detcap._fallback` exactly; see there for the math."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

BACKEND = "compiled"


cdef inline double _lchoose(const double[::1] lf, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    return lf[a] - lf[b] - lf[a - b]


def grouped_esm(const double[:, ::1] values, const cnp.int64_t[:, ::1] counts, Py_ssize_t jmax,
                const double[::1] logfact, const double[:, ::1] hvals=None):
    cdef Py_ssize_t R = values.shape[0]
    cdef Py_ssize_t L = values.shape[1]
    cdef bint has_h = hvals is not None
    out_e = np.zeros((R, jmax + 1), dtype=np.float64)
    out_d = np.zeros((R, jmax + 1), dtype=np.float64)
    cdef double[:, ::1] E = out_e
    cdef double[:, ::1] D = out_d
    cdef double[::1] eo = np.empty(jmax + 1, dtype=np.float64)
    cdef double[::1] do = np.empty(jmax + 1, dtype=np.float64)
    cdef double[::1] pw = np.empty(jmax + 1, dtype=np.float64)
    cdef Py_ssize_t row, l, j, k, klo, khi, top, c, M
    cdef double g, h, H, logH, se, sd
    cdef bint direct

    with nogil:
        for row in range(R):
            E[row, 0] = 1.0
            M = 0
            for l in range(L):
                c = counts[row, l]
                if c <= 0:
                    continue
                g = values[row, l]
                h = hvals[row, l] if has_h else 0.0
                pw[0] = 1.0
                for k in range(1, jmax + 1):
                    pw[k] = pw[k - 1] * g
                for j in range(jmax + 1):
                    eo[j] = E[row, j]
                    do[j] = D[row, j]
                top = M + c
                if top > jmax:
                    top = jmax
                for j in range(top + 1):
                    klo = j - M
                    if klo < 0:
                        klo = 0
                    khi = c if c < j else j
                    logH = (_lchoose(logfact, c, klo) + _lchoose(logfact, M, j - klo)
                            - _lchoose(logfact, M + c, j))
                    direct = logH < -600.0
                    H = exp(logH)
                    se = 0.0
                    sd = 0.0
                    for k in range(klo, khi + 1):
                        if k > klo:
                            if direct:
                                H = exp(_lchoose(logfact, c, k) + _lchoose(logfact, M, j - k)
                                        - _lchoose(logfact, M + c, j))
                            else:
                                H = H * (<double>(c - k + 1) / k) * (<double>(j - k + 1) / (M - j + k))
                        se = se + H * pw[k] * eo[j - k]
                        if has_h and j > 0:
                            sd = sd + H * pw[k] * (j - k) * do[j - k]
                            if k > 0:
                                sd = sd + H * k * pw[k - 1] * h * eo[j - k]
                    E[row, j] = se
                    if has_h and j > 0:
                        D[row, j] = sd / j
                for j in range(top + 1, jmax + 1):
                    E[row, j] = 0.0
                    D[row, j] = 0.0
                M = M + c
    return out_e, out_d


def weighted_alpha_means(const cnp.int64_t[:, ::1] schemes, const double[::1] weights, const double[:, ::1] q):
    cdef Py_ssize_t S = schemes.shape[0]
    cdef Py_ssize_t r = schemes.shape[1]
    cdef Py_ssize_t R = q.shape[0]
    out = np.zeros((R, r + 1), dtype=np.float64)
    cdef double[:, ::1] A = out
    cdef Py_ssize_t row, s, t
    cdef double prod, w, wsum = 0.0
    for s in range(S):
        wsum += weights[s]
    with nogil:
        for row in range(R):
            A[row, 0] = wsum
            for s in range(S):
                w = weights[s]
                if w == 0.0:
                    continue
                prod = 1.0
                for t in range(r):
                    prod = prod * q[row, schemes[s, t]]
                    A[row, t + 1] += w * prod
    return out
