"""Exact rational linear algebra and lattice utilities.

Every lattice in the package is stored as an :class:`HNFBasis`: an integer
matrix in row Hermite normal form together with a common denominator.  Two
lattices are equal exactly when their HNF bases are equal, which is what makes
hashing and deduplication of ideals cheap.

Point enumeration in positive definite forms is delegated to a Fincke-Pohst
kernel (compiled when available, pure Python otherwise) after a cheap pairwise
Gram reduction.  A plain box scan is kept as an oracle.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from math import gcd, isqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import ContainmentError, FormError, RankError

Rat = Fraction

try:  # pragma: no cover - exercised implicitly depending on the build
    if os.environ.get("LEVELP2_PURE_PYTHON"):
        raise ImportError
    from . import _fpenum as _kernel

    BACKEND = "cython"
except ImportError:  # pragma: no cover
    from . import _fpenum_py as _kernel

    BACKEND = "python"

from . import _fpenum_py as _py_kernel


# ---------------------------------------------------------------------------
# scalar helpers


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def lcm(a: int, b: int) -> int:
    return abs(a * b) // gcd(a, b) if a and b else 0


def common_denominator(values: Iterable) -> int:
    d = 1
    for v in values:
        if isinstance(v, Fraction):
            d = lcm(d, v.denominator)
    return d


def rat_gcd(values: Iterable) -> Fraction:
    """gcd of a collection of rationals (the generator of the Z-module they span)."""
    vals = [Fraction(v) for v in values if v != 0]
    if not vals:
        return Fraction(0)
    den = reduce(lcm, (v.denominator for v in vals), 1)
    g = reduce(gcd, (int(v * den) for v in vals))
    return Fraction(abs(g), den)


# ---------------------------------------------------------------------------
# Hermite normal form


def hnf_int(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Row Hermite normal form of an integer matrix, zero rows dropped.

    The result is in echelon form with positive pivots and every entry above a
    pivot reduced into ``[0, pivot)``.
    """
    work = [list(r) for r in rows if any(r)]
    out: list[tuple[int, list[int]]] = []
    for col in range(ncols):
        piv = None
        rest = []
        for r in work:
            if r[col] == 0:
                rest.append(r)
                continue
            if piv is None:
                piv = r
                continue
            a, b = piv[col], r[col]
            if b % a == 0:
                q = b // a
                r2 = [y - q * x for x, y in zip(piv, r)]
            else:
                g, s, t = xgcd(a, b)
                new_p = [s * x + t * y for x, y in zip(piv, r)]
                r2 = [(b // g) * x - (a // g) * y for x, y in zip(piv, r)]
                piv = new_p
            if any(r2):
                rest.append(r2)
        work = rest
        if piv is None:
            continue
        if piv[col] < 0:
            piv = [-x for x in piv]
        out.append((col, piv))
    for i, (ci, ri) in enumerate(out):
        pv = ri[ci]
        for k in range(i):
            rk = out[k][1]
            q = rk[ci] // pv
            if q:
                out[k] = (out[k][0], [x - q * y for x, y in zip(rk, ri)])
    return [r for _, r in out]


@dataclass(frozen=True)
class HNFBasis:
    """A full-rank lattice ``(1/den) * rows`` with ``rows`` in row HNF.

    ``den`` is minimal, so the representation is canonical.
    """

    rows: tuple[tuple[int, ...], ...]
    den: int

    @property
    def dim(self) -> int:
        return len(self.rows)

    def basis(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.den) for x in r] for r in self.rows]

    def det(self) -> Fraction:
        """Covolume (absolute determinant of the basis)."""
        prod = 1
        for i, r in enumerate(self.rows):
            prod *= r[i]
        return Fraction(prod, self.den ** self.dim)

    def coords(self, vec: Sequence) -> list[Fraction] | None:
        """Coordinates of ``vec`` in this basis, or None if not in the span's lattice."""
        w = [Fraction(v) * self.den for v in vec]
        n = self.dim
        c: list[Fraction] = []
        for i in range(n):
            val = w[i]
            for k in range(i):
                val -= c[k] * self.rows[k][i]
            c.append(val / self.rows[i][i])
        return c

    def contains(self, vec: Sequence) -> bool:
        c = self.coords(vec)
        return all(x.denominator == 1 for x in c)

    def contains_lattice(self, other: "HNFBasis") -> bool:
        return all(self.contains(r) for r in other.basis())

    def scale(self, c) -> "HNFBasis":
        c = Fraction(c)
        if c == 0:
            raise RankError("scaling by zero")
        return hnf([[x * c for x in r] for r in self.basis()])

    def __repr__(self) -> str:
        return f"HNFBasis(den={self.den}, rows={self.rows})"


def hnf(generators: Iterable[Sequence], ncols: int | None = None) -> HNFBasis:
    """Canonical HNF basis of the Z-span of rational row vectors.

    Raises RankError unless the span has full rank ``ncols``.
    """
    gens = [[Fraction(x) for x in g] for g in generators]
    if not gens:
        raise RankError("no generators")
    n = ncols if ncols is not None else len(gens[0])
    den = 1
    for g in gens:
        for x in g:
            if x.denominator != 1:
                den = lcm(den, x.denominator)
    irows = [[int(x * den) for x in g] for g in gens]
    rows = hnf_int(irows, n)
    if len(rows) != n:
        raise RankError(f"rank {len(rows)} < {n}")
    g = den
    for r in rows:
        for x in r:
            g = gcd(g, x)
            if g == 1:
                break
    if g > 1:
        rows = [[x // g for x in r] for r in rows]
        den //= g
    return HNFBasis(tuple(tuple(r) for r in rows), den)


def hnf_from_int(rows: Sequence[Sequence[int]], den: int, ncols: int) -> HNFBasis:
    """Fast path of :func:`hnf` for generators already given as ``rows/den``."""
    out = hnf_int(rows, ncols)
    if len(out) != ncols:
        raise RankError(f"rank {len(out)} < {ncols}")
    g = den
    for r in out:
        for x in r:
            g = gcd(g, x)
    if g > 1:
        out = [[x // g for x in r] for r in out]
        den //= g
    return HNFBasis(tuple(tuple(r) for r in out), den)


def lattice_index(sup: HNFBasis, sub: HNFBasis) -> int:
    """[sup : sub] for sub contained in sup."""
    if not sup.contains_lattice(sub):
        raise ContainmentError("sublattice is not contained in the superlattice")
    q = sub.det() / sup.det()
    if q.denominator != 1:
        raise ContainmentError("non-integral index")
    return int(q)


def lattice_sum(*lats: HNFBasis) -> HNFBasis:
    gens = [r for L in lats for r in L.basis()]
    return hnf(gens)


def upper_inverse(rows: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """Inverse of an invertible upper-triangular integer matrix."""
    n = len(rows)
    inv = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n - 1, -1, -1):
        inv[j][j] = Fraction(1, rows[j][j])
        for i in range(j - 1, -1, -1):
            s = Fraction(0)
            for k in range(i + 1, j + 1):
                s += rows[i][k] * inv[k][j]
            inv[i][j] = -s / rows[i][i]
    return inv


def dual_lattice(L: HNFBasis) -> HNFBasis:
    """{x : x . y in Z for all y in L} (standard dot product)."""
    inv = upper_inverse(L.rows)  # B^{-1} = den * inv
    n = L.dim
    cols = [[inv[i][j] * L.den for i in range(n)] for j in range(n)]
    return hnf(cols)


def lattice_intersection(A: HNFBasis, B: HNFBasis) -> HNFBasis:
    return dual_lattice(lattice_sum(dual_lattice(A), dual_lattice(B)))


def dual_of_span(vectors: Iterable[Sequence]) -> HNFBasis:
    """{x : x . g in Z for every g}, for generators spanning full rank."""
    return dual_lattice(hnf(vectors))


# ---------------------------------------------------------------------------
# dense rational matrices


def mat_mul(A, B):
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in zip(*B)] for row in A]


def mat_transpose(A):
    return [list(r) for r in zip(*A)]


def mat_inv(A):
    """Inverse of a square rational matrix by Gauss-Jordan elimination."""
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise RankError("singular matrix")
        M[c], M[piv] = M[piv], M[c]
        pv = M[c][c]
        M[c] = [x / pv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def mat_det(A) -> Fraction:
    n = len(A)
    M = [[Fraction(x) for x in row] for row in A]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        pv = M[c][c]
        det *= pv
        for r in range(c + 1, n):
            if M[r][c] != 0:
                f = M[r][c] / pv
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return det


def rref(A) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q and the pivot columns."""
    M = [[Fraction(x) for x in row] for row in A]
    rows = len(M)
    cols = len(M[0]) if M else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def nullspace_rat(A, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {v : A v = 0} over Q (column-vector convention)."""
    if not A:
        n = ncols or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    M, pivots = rref(A)
    n = len(A[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -M[i][f]
        basis.append(v)
    return basis


def rank_rat(A) -> int:
    if not A:
        return 0
    return len(rref(A)[1])


# ---------------------------------------------------------------------------
# linear algebra over F_ell


def kernel_mod_ell(M: Sequence[Sequence[int]], ell: int) -> list[list[int]]:
    """Echelonized basis of {v in F_ell^n : M v = 0}."""
    rows = [[x % ell for x in r] for r in M]
    n = len(M[0]) if M else 0
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, ell)
        rows[r] = [(x * inv) % ell for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % ell for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-rows[i][f]) % ell
        basis.append(v)
    return basis


def span_mod_ell(vectors: Sequence[Sequence[int]], ell: int) -> list[list[int]]:
    """Reduced echelon basis of the F_ell-span of the given vectors."""
    rows = [[x % ell for x in v] for v in vectors]
    n = len(rows[0]) if rows else 0
    out = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, ell)
        rows[r] = [(x * inv) % ell for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % ell for x, y in zip(rows[i], rows[r])]
        r += 1
    out = [row for row in rows[:r]]
    return out


# ---------------------------------------------------------------------------
# positive definite forms and point enumeration


def _as_int_hessian(gram) -> tuple[list[list[int]], int]:
    """Integer matrix H = 2*s*gram and the scale s (s = lcm of denominators)."""
    g = [[Fraction(x) for x in row] for row in gram]
    s = 1
    for row in g:
        for x in row:
            s = lcm(s, x.denominator)
    H = [[int(2 * s * x) for x in row] for row in g]
    return H, s


def is_positive_definite(H) -> bool:
    n = len(H)
    return all(mat_det([row[:k] for row in H[:k]]) > 0 for k in range(1, n + 1))


def reduce_gram(H: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Pairwise (Lagrange style) reduction of an integer PD Gram matrix.

    Returns (H', U) with H' = U H U^T and U unimodular.
    """
    n = len(H)
    G = [list(map(int, r)) for r in H]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                gjj = G[j][j]
                gij = G[i][j]
                if 2 * abs(gij) > gjj:
                    q = (2 * gij + gjj) // (2 * gjj)
                    if q == 0:
                        continue
                    # b_i <- b_i - q b_j
                    U[i] = [a - q * b for a, b in zip(U[i], U[j])]
                    for k in range(n):
                        G[i][k] -= q * G[j][k]
                    for k in range(n):
                        G[k][i] -= q * G[k][j]
                    changed = True
        order = sorted(range(n), key=lambda k: G[k][k])
        if order != list(range(n)):
            G = [[G[a][b] for b in order] for a in order]
            U = [U[a] for a in order]
    return G, U


def value_histogram(H: Sequence[Sequence[int]], hi: int, method: str = "fp") -> np.ndarray:
    """counts[k] = #{v in Z^n : v^T H v = k} for 0 <= k <= hi (H integer PD)."""
    H = [list(map(int, r)) for r in H]
    if not is_positive_definite(H):
        raise FormError("Gram matrix is not positive definite")
    if method == "box":
        out = np.zeros(hi + 1, dtype=np.int64)
        for v in _box_scan(H, 0, hi):
            out[_qval(H, v)] += 1
        return out
    Hr, _U = reduce_gram(H)
    kern = _kernel if method == "fp" else _py_kernel
    return np.asarray(kern.count_values(np.array(Hr, dtype=np.int64), int(hi)))


def vectors_in_range(H: Sequence[Sequence[int]], lo: int, hi: int, method: str = "fp") -> list[tuple[int, ...]]:
    """Sorted list of v with lo <= v^T H v <= hi (H integer PD)."""
    H = [list(map(int, r)) for r in H]
    if not is_positive_definite(H):
        raise FormError("Gram matrix is not positive definite")
    if method == "box":
        return sorted(tuple(v) for v in _box_scan(H, lo, hi))
    Hr, U = reduce_gram(H)
    kern = _kernel if method == "fp" else _py_kernel
    arr = kern.list_vectors(np.array(Hr, dtype=np.int64), int(lo), int(hi))
    if len(arr) == 0:
        return []
    Um = np.array(U, dtype=object)
    out = (np.asarray(arr, dtype=object) @ Um).tolist()
    return sorted(tuple(int(x) for x in v) for v in out)


def _qval(H, v) -> int:
    n = len(v)
    return sum(H[i][j] * v[i] * v[j] for i in range(n) for j in range(n))


def _box_scan(H, lo, hi):
    """Naive scan of the box |x_i| <= sqrt(hi * (H^-1)_ii)."""
    n = len(H)
    Hinv = mat_inv(H)
    bounds = []
    for i in range(n):
        b = Fraction(hi) * Hinv[i][i]
        bounds.append(isqrt(b.numerator // b.denominator) + 1)
    for v in product(*[range(-b, b + 1) for b in bounds]):
        val = _qval(H, v)
        if lo <= val <= hi:
            yield v


def enumerate_by_value(gram, target, method: str = "fp") -> list[tuple[int, ...]]:
    """All integer vectors v with v^T gram v = target, sorted lexicographically.

    ``gram`` is a symmetric positive definite rational matrix.  ``method`` is
    ``"fp"`` (Fincke-Pohst through the selected backend), ``"py"`` (pure-Python
    kernel) or ``"box"`` (naive oracle).
    """
    H, s = _as_int_hessian(gram)
    if not is_positive_definite(H):
        raise FormError("Gram matrix is not positive definite")
    t = 2 * s * Fraction(target)
    if t < 0:
        return []
    if t.denominator != 1:
        return []
    t = int(t)
    return vectors_in_range(H, t, t, method=method)


def count_by_value(gram, bound, method: str = "fp") -> dict[Fraction, int]:
    """{value: count} over all vectors with 0 <= v^T gram v <= bound."""
    H, s = _as_int_hessian(gram)
    hi = int(2 * s * Fraction(bound))
    hist = value_histogram(H, hi, method=method)
    return {Fraction(k, 2 * s): int(c) for k, c in enumerate(hist) if c}
