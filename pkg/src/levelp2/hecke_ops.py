"""Brandt matrices, the group of two-sided ideals modulo Q^x, and their actions on classes.

Conventions
-----------
``B(m)[i][j]`` is the number of ideals in ``T_m(a_i)`` equivalent to ``a_j``.
A class vector ``v`` (coefficients on the basis ``[a_i]``) is a column vector;
``t_m`` acts on it as ``B(m)^T`` and a two-sided ideal ``g`` acts by the
permutation ``[a_i] -> [g a_i]``.  Vectors are paired by
``<u, v> = sum u_i v_i w_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

import numpy as np

from .arith import is_prime, sigma
from .errors import InternalError
from .ideals import ClassList, LeftIdeal, hom_histogram, t_m_ideals
from .orders_p2 import LevelP2Context, char_chi_lattice
from .quatcore import QuatLattice


@dataclass
class BrandtMatrix:
    m: int
    entries: list[list[int]]

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def operator(self) -> np.ndarray:
        """Matrix acting on column class vectors."""
        return self.as_array().T

    def row_sums(self) -> list[int]:
        return [sum(r) for r in self.entries]

    def to_json(self) -> dict:
        return {"m": self.m, "entries": self.entries}


class HeckeData:
    """Brandt matrices for a class list, computed from pairwise hom histograms."""

    def __init__(self, cl: ClassList, mmax: int = 0):
        self.cl = cl
        self._mmax = -1
        self._hist: dict[tuple[int, int], np.ndarray] = {}
        if mmax:
            self.extend(mmax)

    def extend(self, mmax: int) -> None:
        if mmax <= self._mmax:
            return
        reps = self.cl.reps
        h = len(reps)
        for i in range(h):
            for j in range(i, h):
                arr = hom_histogram(reps[i], reps[j], mmax)
                self._hist[(i, j)] = arr
                self._hist[(j, i)] = arr
        self._mmax = mmax

    def hom(self, i: int, j: int, m: int) -> Fraction:
        """hom_count(a_i, a_j, m)."""
        self.extend(m)
        return Fraction(int(self._hist[(i, j)][m]), 2)

    def brandt(self, m: int) -> BrandtMatrix:
        self.extend(m)
        h = self.cl.h
        w = self.cl.weights
        rows = []
        for i in range(h):
            row = []
            for j in range(h):
                val = Fraction(int(self._hist[(j, i)][m]), 2) / w[j]
                if val.denominator != 1:
                    raise InternalError(f"non-integral Brandt entry at m={m}")
                row.append(int(val))
            rows.append(row)
        return BrandtMatrix(m, rows)

    def series(self, i: int, j: int, nmax: int) -> np.ndarray:
        """Full counts #{u in a_i^-1 a_j : nrd u = n N(a_j)/N(a_i)}, n <= nmax."""
        self.extend(nmax)
        return self._hist[(i, j)][: nmax + 1]


def brandt(cl: ClassList, m: int) -> BrandtMatrix:
    return HeckeData(cl, m).brandt(m)


def brandt_explicit(cl: ClassList, m: int) -> BrandtMatrix:
    """Brandt matrix by listing T_m(a_i) and classifying each member."""
    h = cl.h
    rows = []
    for i in range(h):
        row = [0] * h
        for b in t_m_ideals(cl.reps[i], m):
            row[cl.classify(b)] += 1
        rows.append(row)
    return BrandtMatrix(m, rows)


def check_self_adjoint(B: BrandtMatrix, weights) -> bool:
    """B W symmetric with W = diag(weights)."""
    h = len(weights)
    return all(B.entries[i][j] * weights[j] == B.entries[j][i] * weights[i] for i in range(h) for j in range(h))


def check_row_sums(B: BrandtMatrix) -> bool:
    return all(s == sigma(B.m) for s in B.row_sums())


# ---------------------------------------------------------------------------
# the two-sided ideal group


def _normalize(L: QuatLattice, p: int) -> tuple[QuatLattice, int]:
    """Scale L by a rational so that its norm is 1 or p; returns (lattice, norm)."""
    n = L.norm
    for target in (1, p):
        r = n / target
        num, den = r.numerator, r.denominator
        sn, sd = isqrt(num), isqrt(den)
        if sn * sn == num and sd * sd == den:
            return L.scale(Fraction(sd, sn)), target
    raise InternalError(f"norm {n} is neither a square nor p times a square")


@dataclass
class BilateralGroup:
    """Two-sided O_tilde-ideals modulo Q^x: a dihedral group of order 2(p+1)."""

    p: int
    elements: list[QuatLattice]
    norms: list[int]
    table: list[list[int]]
    identity: int
    rho: int
    wtilde: int
    norm_p: list[int]
    chi: list[int]
    _lookup: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    def power(self, g: int, k: int) -> int:
        r = self.identity
        for _ in range(k % self.element_order(g) if k >= 0 else 0):
            r = self.mul(r, g)
        if k < 0:
            return self.inverse(self.power(g, -k))
        return r

    def inverse(self, g: int) -> int:
        return next(h for h in range(self.order) if self.table[g][h] == self.identity)

    def element_order(self, g: int) -> int:
        k, r = 1, g
        while r != self.identity:
            r = self.mul(r, g)
            k += 1
        return k

    def index_of(self, L: QuatLattice) -> int:
        N, _ = _normalize(L, self.p)
        return self._lookup[N]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "order": self.order,
            "norms": self.norms,
            "table": self.table,
            "identity": self.identity,
            "rho": self.rho,
            "wtilde": self.wtilde,
            "norm_p": self.norm_p,
            "chi": self.chi,
        }


def bilateral_group(ctx: LevelP2Context) -> BilateralGroup:
    p = ctx.p
    elems = list(ctx.norm_one) + [s.source_ideal for s in ctx.suborders]
    norms = [1] * len(ctx.norm_one) + [p] * len(ctx.suborders)
    lookup = {L: k for k, L in enumerate(elems)}
    if len(lookup) != 2 * (p + 1):
        raise InternalError("two-sided ideals are not distinct")
    n = len(elems)
    table = [[0] * n for _ in range(n)]
    for g in range(n):
        for h in range(n):
            N, _ = _normalize(elems[g] * elems[h], p)
            if N not in lookup:
                raise InternalError("product of two-sided ideals left the group")
            table[g][h] = lookup[N]
    identity = lookup[ctx.O_tilde]
    chi = [char_chi_lattice(L, p) for L in elems]
    G = BilateralGroup(p, elems, norms, table, identity, -1, -1, list(range(p + 1, n)), chi, lookup)
    # generator of the norm-one subgroup
    rho = next((g for g in range(p + 1) if G.element_order(g) == p + 1), None)
    if rho is None:
        raise InternalError("norm-one subgroup is not cyclic")
    G.rho = rho
    G.wtilde = G.power(rho, (p + 1) // 2)
    _verify_dihedral(G)
    return G


def _verify_dihedral(G: BilateralGroup) -> None:
    n, e = G.order, G.identity
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if G.table[G.table[a][b]][c] != G.table[a][G.table[b][c]]:
                    raise InternalError("group law is not associative")
    if any(G.table[e][g] != g or G.table[g][e] != g for g in range(n)):
        raise InternalError("identity element is wrong")
    rinv = G.inverse(G.rho)
    for s in G.norm_p:
        if G.element_order(s) != 2:
            raise InternalError("norm-p element is not an involution")
        if G.mul(G.mul(s, G.rho), s) != rinv:
            raise InternalError("dihedral relation fails")
    involutions = [g for g in range(G.p + 1) if G.element_order(g) == 2]
    if involutions != [G.wtilde]:
        raise InternalError("norm-one subgroup does not have a unique involution")


# ---------------------------------------------------------------------------
# actions on class vectors


def class_permutation(G: BilateralGroup, g: int, cl: ClassList) -> list[int]:
    """pi with [g a_i] = [a_{pi(i)}]."""
    I = G.elements[g]
    return [cl.classify(LeftIdeal(I * a.lattice, cl.order)) for a in cl.reps]


def permutation_matrix(pi: list[int]) -> np.ndarray:
    """Column action: e_i -> e_{pi(i)}."""
    h = len(pi)
    M = np.zeros((h, h), dtype=np.int64)
    for i, j in enumerate(pi):
        M[j, i] = 1
    return M


def W_matrix(G: BilateralGroup, g: int, cl: ClassList) -> np.ndarray:
    return permutation_matrix(class_permutation(G, g, cl))


def W_apply(G: BilateralGroup, g: int, cl: ClassList, v):
    pi = class_permutation(G, g, cl)
    out = [0] * len(v)
    for i, j in enumerate(pi):
        out[j] = out[j] + v[i]
    return out


def chi_vector(cl: ClassList, p: int) -> list[int]:
    return [char_chi_lattice(a.lattice, p) for a in cl.reps]


def twist_matrix(chi: list[int]) -> np.ndarray:
    """The operator [b] -> chi(b) [b]."""
    return np.diag(np.array(chi, dtype=np.int64))


def eisenstein_vector(cl: ClassList) -> list[Fraction]:
    return [1 / w for w in cl.weights]


def pairing(u, v, weights) -> Fraction:
    return sum((a * b * w for a, b, w in zip(u, v, weights)), Fraction(0))


def hecke_primes(p: int, bound: int) -> list[int]:
    return [ell for ell in range(2, bound + 1) if is_prime(ell) and ell != p]
