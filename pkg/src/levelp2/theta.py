"""Theta series: the weight-2 pairing phi and the weight-3/2 maps.

For a suborder ``O' = Z + b^-1 P b`` the quotient ``O'/Z`` is realized as
the lattice of pure parts ``x - tr(x)/2`` carrying the ternary form
``-Delta(x)/p = (4/p) nrd(pure part)``.  ``Theta_P(b)`` is half the theta
series of this ternary lattice.  The level-4p map uses the right order of
``b`` in place of ``O'``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import kronecker
from .errors import InternalError
from .ideals import LeftIdeal, hom_histogram
from .quatcore import QuatLattice
from .ratlinalg import hnf, is_positive_definite, mat_det, value_histogram, vectors_in_range
from .specialpoints import conjugated_ideal, z_plus

DEFAULT_PREC = 100


@dataclass
class QExpansion:
    """coeffs[n] is the coefficient of q^n for 0 <= n < prec."""

    coeffs: list
    weight: Fraction = Fraction(2)
    level: int | None = None

    @property
    def prec(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __add__(self, other: "QExpansion") -> "QExpansion":
        n = min(self.prec, other.prec)
        return QExpansion([a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])], self.weight, self.level)

    def __sub__(self, other: "QExpansion") -> "QExpansion":
        return self + other.scale(-1)

    def scale(self, c) -> "QExpansion":
        return QExpansion([c * a for a in self.coeffs], self.weight, self.level)

    def agrees(self, other: "QExpansion", prec: int | None = None) -> bool:
        n = min(self.prec, other.prec) if prec is None else prec
        return all(a == b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def to_json(self) -> dict:
        return {
            "weight": str(self.weight),
            "level": self.level,
            "prec": self.prec,
            "coeffs": [_fmt(c) for c in self.coeffs],
        }


def _fmt(c):
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    if isinstance(c, int):
        return f"{c}/1"
    return str(c)


def zero_series(prec: int, weight=Fraction(3, 2), level=None) -> QExpansion:
    return QExpansion([Fraction(0)] * prec, weight, level)


# ---------------------------------------------------------------------------
# weight 2


def phi(a: LeftIdeal, b: LeftIdeal, prec: int) -> QExpansion:
    """1/2 sum over x in a^-1 b of q^(nrd x / N(a^-1 b)); coefficients n < prec."""
    hist = hom_histogram(a, b, prec - 1)
    return QExpansion([Fraction(int(c), 2) for c in hist], Fraction(2))


def phi_matrix(reps: list[LeftIdeal], prec: int) -> list[list[QExpansion]]:
    return [[phi(a, b, prec) for b in reps] for a in reps]


def phi_bilinear(u, v, table: list[list[QExpansion]]) -> QExpansion:
    prec = table[0][0].prec
    out = [0] * prec
    for i, ui in enumerate(u):
        for j, vj in enumerate(v):
            if ui == 0 or vj == 0:
                continue
            c = ui * vj
            out = [o + c * t for o, t in zip(out, table[i][j].coeffs)]
    return QExpansion(out, Fraction(2))


# ---------------------------------------------------------------------------
# ternary lattices


@dataclass
class TernaryLattice:
    """O'/Z with the form -Delta(x)/p, as a Gram matrix in a basis of pure parts."""

    source: QuatLattice
    basis: list[list[Fraction]]  # pure quaternions (0, x1, x2, x3)
    gram: list[list[Fraction]]
    p: int

    @property
    def hessian(self) -> list[list[int]]:
        return [[int(2 * x) for x in row] for row in self.gram]

    @property
    def det(self) -> Fraction:
        return mat_det(self.gram)

    def value(self, v) -> Fraction:
        return sum((self.gram[i][j] * v[i] * v[j] for i in range(3) for j in range(3)), Fraction(0))

    def to_json(self) -> dict:
        return {"gram": [[_fmt(x) for x in row] for row in self.gram], "det": _fmt(self.det)}


def ternary_from_order(Op: QuatLattice, p: int) -> TernaryLattice:
    alg = Op.algebra
    pure = []
    for r in Op.rows():
        pure.append((r[1], r[2], r[3]))
    B3 = hnf(pure, 3).basis()
    basis = [[Fraction(0)] + list(b) for b in B3]
    if len(basis) != 3:
        raise InternalError("pure parts do not span a rank-3 lattice")
    gram = [[Fraction(4, p) * alg.bilinear(x, y) for y in basis] for x in basis]
    for i in range(3):
        if gram[i][i].denominator != 1:
            raise InternalError("ternary form is not integral")
        for j in range(3):
            if (2 * gram[i][j]).denominator != 1:
                raise InternalError("ternary form is not integral")
    if not is_positive_definite([[int(2 * x) for x in row] for row in gram]):
        raise InternalError("ternary form is not positive definite")
    return TernaryLattice(Op, basis, gram, p)


def ternary_quotient(b: LeftIdeal, P: QuatLattice, p: int) -> TernaryLattice:
    """(Z + b^-1 P b)/Z with the form -Delta/p."""
    return ternary_from_order(z_plus(conjugated_ideal(b, P)), p)


def ternary_theta(T: TernaryLattice, prec: int) -> list[Fraction]:
    hist = value_histogram(T.hessian, 2 * (prec - 1))
    return [Fraction(int(hist[2 * n]), 2) for n in range(prec)]


def theta32(b: LeftIdeal, P: QuatLattice, p: int, prec: int = DEFAULT_PREC) -> QExpansion:
    """Theta_P of the class of b: c_d = 1/2 #{x in (Z + b^-1 P b)/Z : -Delta(x)/p = d}."""
    return QExpansion(ternary_theta(ternary_quotient(b, P, p), prec), Fraction(3, 2), 4 * p * p)


def theta32_alt(b: LeftIdeal, P: QuatLattice, p: int, prec: int = DEFAULT_PREC) -> QExpansion:
    """The same coefficients by a four-dimensional enumeration of Z + b^-1 P b.

    Every class of O'/Z has a unique representative with trace 0 or 1; for
    -Delta(x)/p = d that representative has nrd (t^2 + p d)/4.
    """
    Op = z_plus(conjugated_ideal(b, P))
    rows = Op.rows()
    H = Op.hessian
    N = Op.norm
    top = Fraction(1 + p * (prec - 1), 4)
    hi = int(2 * top / N)
    counts = [0] * prec
    for v in vectors_in_range(H, 0, hi):
        x = [sum((v[k] * rows[k][t] for k in range(4)), Fraction(0)) for t in range(4)]
        tr = 2 * x[0]
        if tr not in (0, 1):
            continue
        nrd = Op.algebra.nrd(x)
        d = (4 * nrd - tr * tr) / p
        if d.denominator != 1:
            raise InternalError("-Delta/p is not integral")
        if 0 <= d < prec:
            counts[int(d)] += 1
    return QExpansion([Fraction(c, 2) for c in counts], Fraction(3, 2), 4 * p * p)


def theta_level4p(b: LeftIdeal, p: int, prec: int = DEFAULT_PREC) -> QExpansion:
    """Theta of the class of b at level 4p: O_r(b)/Z with the form -Delta/p."""
    return QExpansion(ternary_theta(ternary_from_order(b.right_order, p), prec), Fraction(3, 2), 4 * p)


@dataclass
class ThetaTable:
    """Per-class series, cached; vectors are combined linearly."""

    reps: list[LeftIdeal]
    p: int
    prec: int = DEFAULT_PREC
    _cache: dict = field(default_factory=dict, repr=False)

    def series(self, i: int, P: QuatLattice | None) -> QExpansion:
        key = (i, P)
        if key not in self._cache:
            if P is None:
                self._cache[key] = theta_level4p(self.reps[i], self.p, self.prec)
            else:
                self._cache[key] = theta32(self.reps[i], P, self.p, self.prec)
        return self._cache[key]

    def vec(self, v, P: QuatLattice | None) -> list:
        """sum_i v_i Theta(a_i); works for rational or number-field coordinates."""
        out = [0] * self.prec
        for i, vi in enumerate(v):
            if vi == 0:
                continue
            s = self.series(i, P).coeffs
            out = [o + vi * c for o, c in zip(out, s)]
        return out


def theta32_vec(v, reps: list[LeftIdeal], P: QuatLattice, p: int, prec: int = DEFAULT_PREC) -> QExpansion:
    return QExpansion(ThetaTable(reps, p, prec).vec(v, P), Fraction(3, 2), 4 * p * p)


def valid_index(p: int, d: int) -> bool:
    """-p d is a discriminant (0 or 1 mod 4)."""
    return (-p * d) % 4 in (0, 1)


def shimura_character(p: int, ell: int, d: int) -> int:
    """kappa_p(ell) (-d | ell), which equals (-p d | ell)."""
    return kronecker(-p * d, ell)


def shimura_defect(coeffs, lam, ell: int, p: int, char=None) -> list[int]:
    """Valid d with lam c(d) != c(l^2 d) + char(d) c(d) + l c(d/l^2).

    ``char(d)`` defaults to the character (-p d | ell).  Only d with
    ``l^2 d`` inside the expansion and -p d a discriminant are tested.
    """
    if char is None:
        char = lambda d: shimura_character(p, ell, d)  # noqa: E731
    prec = len(coeffs)
    bad = []
    for d in range(1, (prec - 1) // (ell * ell) + 1):
        if not valid_index(p, d):
            continue
        lhs = lam * coeffs[d]
        rhs = coeffs[ell * ell * d] + char(d) * coeffs[d]
        if d % (ell * ell) == 0:
            rhs = rhs + ell * coeffs[d // (ell * ell)]
        if not _is_zero(lhs - rhs):
            bad.append(d)
    return bad


def _is_zero(x) -> bool:
    if hasattr(x, "is_zero") and callable(x.is_zero):
        return x.is_zero()
    return x == 0


def ternary_dets(reps: list[LeftIdeal], P: QuatLattice, p: int) -> list[Fraction]:
    return [ternary_quotient(b, P, p).det for b in reps]


def coefficient_vector_np(series: list[QExpansion], d: int) -> np.ndarray:
    return np.array([float(s[d]) for s in series])
