"""Exact arithmetic in Q[x]/(g) for an irreducible g, and linear algebra over it.

Hecke eigenvectors live over the field generated by their eigenvalues.  This
module keeps them exact so that eigenspace dimensions and the identities that
use them are decided by exact zero tests rather than tolerances.
"""

from __future__ import annotations

from fractions import Fraction

import sympy
from sympy import Poly, QQ, Symbol

X = Symbol("x")


class NumberField:
    """Q(alpha) with alpha a root of the irreducible rational polynomial g."""

    def __init__(self, g):
        if not isinstance(g, Poly):
            g = Poly(g, X, domain=QQ)
        g = g.monic()
        if not g.is_irreducible:
            raise ValueError("defining polynomial is not irreducible")
        self.g = g
        self.degree = g.degree()

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.g == other.g

    def __hash__(self):
        return hash(tuple(self.g.all_coeffs()))

    def __repr__(self):
        return f"NumberField({self.g.as_expr()})"

    def elem(self, value) -> "NFElem":
        if isinstance(value, NFElem):
            return value
        if isinstance(value, Poly):
            return NFElem(self, value.rem(self.g))
        return NFElem(self, Poly(sympy.Rational(Fraction(value).numerator, Fraction(value).denominator), X, domain=QQ))

    def zero(self) -> "NFElem":
        return self.elem(0)

    def one(self) -> "NFElem":
        return self.elem(1)

    def gen(self) -> "NFElem":
        return self.elem(Poly(X, X, domain=QQ))

    def real_roots(self) -> list[float]:
        """Real embeddings alpha -> r, sorted increasingly."""
        return [float(r) for r in sympy.Poly(self.g.as_expr(), X).real_roots()]

    def to_json(self) -> dict:
        return {"polynomial": [str(c) for c in self.g.all_coeffs()], "degree": self.degree}


class NFElem:
    __slots__ = ("K", "poly")

    def __init__(self, K: NumberField, poly: Poly):
        self.K = K
        self.poly = poly

    def _coerce(self, other) -> "NFElem":
        if isinstance(other, NFElem):
            return other
        return self.K.elem(other)

    def __add__(self, other):
        return NFElem(self.K, self.poly + self._coerce(other).poly)

    __radd__ = __add__

    def __sub__(self, other):
        return NFElem(self.K, self.poly - self._coerce(other).poly)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return NFElem(self.K, -self.poly)

    def __mul__(self, other):
        return NFElem(self.K, (self.poly * self._coerce(other).poly).rem(self.K.g))

    __rmul__ = __mul__

    def inverse(self) -> "NFElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a number field")
        return NFElem(self.K, self.poly.invert(self.K.g))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        out = self.K.one()
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    def is_zero(self) -> bool:
        return self.poly.is_zero

    def __eq__(self, other):
        try:
            return (self - other).is_zero()
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(tuple(self.poly.all_coeffs()))

    def is_rational(self) -> bool:
        return self.poly.degree() <= 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        c = self.poly.LC() if not self.poly.is_zero else 0
        c = sympy.Rational(c)
        return Fraction(int(c.p), int(c.q))

    def embed(self, root: float) -> float:
        return float(sum(float(c) * root**k for k, c in enumerate(reversed(self.poly.all_coeffs()))))

    def coeffs(self) -> list[Fraction]:
        """Coefficients on 1, alpha, alpha^2, ... (length = degree)."""
        cs = [sympy.Rational(c) for c in reversed(self.poly.all_coeffs())]
        cs = cs + [sympy.Rational(0)] * (self.K.degree - len(cs))
        return [Fraction(int(c.p), int(c.q)) for c in cs]

    def __repr__(self):
        return f"[{self.poly.as_expr()}]"


# ---------------------------------------------------------------------------
# linear algebra over a number field


def nf_matrix(K: NumberField, M) -> list[list[NFElem]]:
    return [[K.elem(int(x) if not isinstance(x, (Fraction, NFElem)) else x) for x in row] for row in M]


def nf_nullspace(K: NumberField, M: list[list[NFElem]]) -> list[list[NFElem]]:
    """Basis of {v : M v = 0} (column vectors), by exact row reduction."""
    rows = [list(r) for r in M]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [K.zero() for _ in range(ncols)]
        v[fcol] = K.one()
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fcol]
        basis.append(v)
    return basis


def nf_matvec(M, v):
    return [sum((a * b for a, b in zip(row, v)), v[0] * 0) for row in M]


def nf_solve_in_span(K: NumberField, basis: list[list[NFElem]], target: list[NFElem]) -> list[NFElem] | None:
    """Coefficients c with sum c_k basis_k = target, or None."""
    n = len(target)
    k = len(basis)
    # columns = basis vectors, augmented with -target
    M = [[basis[j][i] for j in range(k)] + [-target[i]] for i in range(n)]
    ns = nf_nullspace(K, M)
    for v in ns:
        if not v[k].is_zero():
            s = v[k].inverse()
            return [x * s for x in v[:k]]
    return None


def nf_rank(K: NumberField, vectors: list[list[NFElem]]) -> int:
    if not vectors:
        return 0
    n = len(vectors[0])
    M = [[v[i] for v in vectors] for i in range(n)]
    return len(vectors) - len(nf_nullspace(K, M))
