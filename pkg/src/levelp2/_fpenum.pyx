# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Fincke-Pohst kernels for small positive definite integer forms.

Both entry points take the integer Hessian ``H`` of a form (so that the value
of a vector ``v`` is ``v^T H v``) and walk the ellipsoid ``v^T H v <= hi``
depth first.  Pruning uses a floating point square-completion with a safety
margin; every candidate is then re-evaluated in exact 64-bit integer
arithmetic, so the float step can only cost time, never correctness.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, ceil

cnp.import_array()

cdef enum:
    MAXDIM = 8


cdef int _decompose(long long[:, :] H, int n, double q[MAXDIM][MAXDIM]) except -1:
    cdef int i, j, k, l
    for i in range(n):
        for j in range(n):
            q[i][j] = <double> H[i, j]
    for i in range(n):
        if q[i][i] <= 0.0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return 0


cdef inline long long _value(long long[:, :] H, long long *x, int n):
    cdef long long s = 0
    cdef int i, j
    for i in range(n):
        s += H[i, i] * x[i] * x[i]
        for j in range(i + 1, n):
            s += 2 * H[i, j] * x[i] * x[j]
    return s


def count_values(long long[:, :] H, long long hi):
    """Histogram ``out[k] = #{v : v^T H v = k}`` for ``0 <= k <= hi``."""
    cdef int n = H.shape[0]
    if n < 1 or n > MAXDIM:
        raise ValueError("dimension out of range")
    cdef double q[MAXDIM][MAXDIM]
    _decompose(H, n, q)
    out_arr = np.zeros(hi + 1, dtype=np.int64)
    cdef long long[:] out = out_arr
    cdef long long x[MAXDIM]
    cdef double T[MAXDIM]
    cdef double U[MAXDIM]
    cdef long long upper[MAXDIM]
    cdef double eps = 1e-7 * (<double> hi + 1.0)
    cdef int i, j
    cdef double r, c
    cdef long long lin, rest, val, x0, lo0, hi0
    i = n - 1
    T[i] = <double> hi + eps
    U[i] = 0.0
    r = sqrt(T[i] / q[i][i])
    x[i] = <long long> ceil(-U[i] - r)
    upper[i] = <long long> floor(-U[i] + r)
    while True:
        if x[i] > upper[i]:
            i += 1
            if i >= n:
                break
            x[i] += 1
            continue
        if i == 0:
            # innermost coordinate: evaluate the whole admissible range exactly
            lin = 0
            for j in range(1, n):
                lin += H[0, j] * x[j]
            x0 = x[0]
            x[0] = 0
            rest = _value(H, x, n)
            lo0 = x0
            hi0 = upper[0]
            x0 = lo0
            while x0 <= hi0:
                val = H[0, 0] * x0 * x0 + 2 * lin * x0 + rest
                if 0 <= val <= hi:
                    out[val] += 1
                x0 += 1
            x[0] = hi0 + 1
            continue
        c = x[i] + U[i]
        T[i - 1] = T[i] - q[i][i] * c * c
        i -= 1
        U[i] = 0.0
        for j in range(i + 1, n):
            U[i] += q[i][j] * x[j]
        if T[i] < 0.0:
            T[i] = 0.0
        r = sqrt(T[i] / q[i][i])
        x[i] = <long long> ceil(-U[i] - r)
        upper[i] = <long long> floor(-U[i] + r)
    return out_arr


def list_vectors(long long[:, :] H, long long lo, long long hi):
    """All integer vectors with ``lo <= v^T H v <= hi`` as an (N, n) array."""
    cdef int n = H.shape[0]
    if n < 1 or n > MAXDIM:
        raise ValueError("dimension out of range")
    cdef double q[MAXDIM][MAXDIM]
    _decompose(H, n, q)
    cdef long long x[MAXDIM]
    cdef double T[MAXDIM]
    cdef double U[MAXDIM]
    cdef long long upper[MAXDIM]
    cdef double eps = 1e-7 * (<double> hi + 1.0)
    cdef int i, j
    cdef double r, c
    cdef long long lin, rest, val, x0, hi0
    cdef Py_ssize_t cap = 64, cnt = 0
    buf_arr = np.empty((cap, n), dtype=np.int64)
    cdef long long[:, :] buf = buf_arr
    i = n - 1
    T[i] = <double> hi + eps
    U[i] = 0.0
    r = sqrt(T[i] / q[i][i])
    x[i] = <long long> ceil(-U[i] - r)
    upper[i] = <long long> floor(-U[i] + r)
    while True:
        if x[i] > upper[i]:
            i += 1
            if i >= n:
                break
            x[i] += 1
            continue
        if i == 0:
            lin = 0
            for j in range(1, n):
                lin += H[0, j] * x[j]
            x0 = x[0]
            x[0] = 0
            rest = _value(H, x, n)
            hi0 = upper[0]
            while x0 <= hi0:
                val = H[0, 0] * x0 * x0 + 2 * lin * x0 + rest
                if lo <= val <= hi:
                    if cnt == cap:
                        cap *= 2
                        new_arr = np.empty((cap, n), dtype=np.int64)
                        new_arr[:cnt] = buf_arr[:cnt]
                        buf_arr = new_arr
                        buf = buf_arr
                    buf[cnt, 0] = x0
                    for j in range(1, n):
                        buf[cnt, j] = x[j]
                    cnt += 1
                x0 += 1
            x[0] = hi0 + 1
            continue
        c = x[i] + U[i]
        T[i - 1] = T[i] - q[i][i] * c * c
        i -= 1
        U[i] = 0.0
        for j in range(i + 1, n):
            U[i] += q[i][j] * x[j]
        if T[i] < 0.0:
            T[i] = 0.0
        r = sqrt(T[i] / q[i][i])
        x[i] = <long long> ceil(-U[i] - r)
        upper[i] = <long long> floor(-U[i] + r)
    return buf_arr[:cnt].copy()
