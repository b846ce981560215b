"""Pure-Python twin of the compiled Fincke-Pohst kernels.

Same algorithm and same contract as ``_fpenum.pyx``; used when the extension
is not built, and by the benchmark as the baseline.
"""

from math import ceil, floor, sqrt

import numpy as np


def _decompose(H, n):
    q = [[float(H[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        if q[i][i] <= 0.0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def _walk(H, hi):
    """Yield (x, lin, rest, lo0, hi0) for every admissible innermost range."""
    n = len(H)
    q = _decompose(H, n)
    eps = 1e-7 * (hi + 1.0)
    x = [0] * n
    T = [0.0] * n
    U = [0.0] * n
    upper = [0] * n
    i = n - 1
    T[i] = hi + eps
    r = sqrt(T[i] / q[i][i])
    x[i] = ceil(-r)
    upper[i] = floor(r)
    while True:
        if x[i] > upper[i]:
            i += 1
            if i >= n:
                return
            x[i] += 1
            continue
        if i == 0:
            lin = sum(H[0][j] * x[j] for j in range(1, n))
            rest = 0
            for a in range(1, n):
                rest += H[a][a] * x[a] * x[a]
                for b in range(a + 1, n):
                    rest += 2 * H[a][b] * x[a] * x[b]
            yield x, lin, rest, x[0], upper[0]
            x[0] = upper[0] + 1
            continue
        c = x[i] + U[i]
        T[i - 1] = max(T[i] - q[i][i] * c * c, 0.0)
        i -= 1
        U[i] = sum(q[i][j] * x[j] for j in range(i + 1, n))
        r = sqrt(T[i] / q[i][i])
        x[i] = ceil(-U[i] - r)
        upper[i] = floor(-U[i] + r)


def count_values(H, hi):
    """Histogram ``out[k] = #{v : v^T H v = k}`` for ``0 <= k <= hi``."""
    H = [[int(v) for v in row] for row in np.asarray(H).tolist()]
    out = np.zeros(int(hi) + 1, dtype=np.int64)
    h00 = H[0][0]
    for _x, lin, rest, lo0, hi0 in _walk(H, int(hi)):
        for x0 in range(lo0, hi0 + 1):
            val = h00 * x0 * x0 + 2 * lin * x0 + rest
            if 0 <= val <= hi:
                out[val] += 1
    return out


def list_vectors(H, lo, hi):
    """All integer vectors with ``lo <= v^T H v <= hi`` as an (N, n) array."""
    H = [[int(v) for v in row] for row in np.asarray(H).tolist()]
    n = len(H)
    h00 = H[0][0]
    found = []
    for x, lin, rest, lo0, hi0 in _walk(H, int(hi)):
        tail = x[1:]
        for x0 in range(lo0, hi0 + 1):
            val = h00 * x0 * x0 + 2 * lin * x0 + rest
            if lo <= val <= hi:
                found.append([x0] + tail)
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    return np.array(found, dtype=np.int64)
