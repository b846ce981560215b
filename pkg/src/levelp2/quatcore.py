"""Definite quaternion algebras over Q, their elements and rank-4 lattices.

The algebra ``(a, b)`` has basis ``1, i, j, k`` with ``i^2 = a``, ``j^2 = b``
and ``k = ij = -ji``.  Only integer ``a, b < 0`` are supported, which covers
every algebra the package builds.

Lattices are :class:`QuatLattice` objects wrapping a canonical
:class:`~levelp2.ratlinalg.HNFBasis` of coordinate rows.  Equality and hashing
go through the HNF, so two lattices compare equal exactly when they coincide
as subsets of the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import isqrt
from typing import Iterable, Sequence

from .errors import AlgebraError, DegenerateError, IdealError, InputError
from .ratlinalg import (
    HNFBasis,
    dual_of_span,
    hnf,
    hnf_from_int,
    lattice_index,
    lattice_intersection,
    lattice_sum,
    mat_det,
    rat_gcd,
    upper_inverse,
)


@dataclass(frozen=True)
class QuatAlgebra:
    """The definite quaternion algebra ``(a, b)`` over Q."""

    a: int
    b: int

    def __post_init__(self):
        if int(self.a) != self.a or int(self.b) != self.b:
            raise InputError("only integral structure constants are supported")
        if self.a >= 0 or self.b >= 0:
            raise InputError("algebra must be definite (a < 0 and b < 0)")

    @property
    def norm_diag(self) -> tuple[int, int, int, int]:
        """Diagonal of the bilinear form attached to nrd in the basis 1, i, j, k."""
        a, b = self.a, self.b
        return (1, -a, -b, a * b)

    def mul(self, x: Sequence, y: Sequence) -> tuple:
        """Product of coordinate 4-tuples (ints or Fractions)."""
        a, b = self.a, self.b
        x0, x1, x2, x3 = x
        y0, y1, y2, y3 = y
        return (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        )

    def nrd(self, x: Sequence):
        a, b = self.a, self.b
        return x[0] * x[0] - a * x[1] * x[1] - b * x[2] * x[2] + a * b * x[3] * x[3]

    def bilinear(self, x: Sequence, y: Sequence):
        """B(x, y) = (nrd(x+y) - nrd(x) - nrd(y)) / 2."""
        d = self.norm_diag
        return sum(d[k] * x[k] * y[k] for k in range(4))

    def ramified_primes(self) -> tuple[int, ...]:
        from .orders_p2 import ramified_places

        return tuple(v for v in ramified_places(self.a, self.b) if v != 0)

    def element(self, *coords) -> "QuatElement":
        if len(coords) == 1:
            coords = tuple(coords[0])
        return QuatElement(self, tuple(Fraction(c) for c in coords))

    def one(self) -> "QuatElement":
        return self.element(1, 0, 0, 0)

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class QuatElement:
    """An element of a quaternion algebra with rational coordinates."""

    algebra: QuatAlgebra
    coords: tuple

    def _check(self, other: "QuatElement"):
        if not isinstance(other, QuatElement):
            raise AlgebraError("expected a quaternion element")
        if other.algebra != self.algebra:
            raise AlgebraError("elements belong to different algebras")

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuatElement(self.algebra, tuple(c * other for c in self.coords))
        self._check(other)
        return QuatElement(self.algebra, self.algebra.mul(self.coords, other.coords))

    def __rmul__(self, other):
        # only reached for scalar left factors, which are central
        return self.__mul__(other)

    def __add__(self, other):
        self._check(other)
        return QuatElement(self.algebra, tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return QuatElement(self.algebra, tuple(x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self):
        return QuatElement(self.algebra, tuple(-x for x in self.coords))

    def conj(self) -> "QuatElement":
        x = self.coords
        return QuatElement(self.algebra, (x[0], -x[1], -x[2], -x[3]))

    def nrd(self) -> Fraction:
        return Fraction(self.algebra.nrd(self.coords))

    def trace(self) -> Fraction:
        return 2 * Fraction(self.coords[0])

    def delta(self) -> Fraction:
        """tr(x)^2 - 4 nrd(x)."""
        return self.trace() ** 2 - 4 * self.nrd()

    def inverse(self) -> "QuatElement":
        n = self.nrd()
        if n == 0:
            raise DegenerateError("zero has no inverse")
        return self.conj() * (1 / n)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)


def elem_mul(x: QuatElement, y: QuatElement) -> QuatElement:
    return x * y


def elem_conj(x: QuatElement) -> QuatElement:
    return x.conj()


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True, eq=True)
class QuatLattice:
    """A full-rank Z-lattice in a quaternion algebra."""

    algebra: QuatAlgebra
    basis: HNFBasis = field(compare=True)

    # ---- constructors -------------------------------------------------
    @classmethod
    def from_generators(cls, algebra: QuatAlgebra, gens: Iterable) -> "QuatLattice":
        rows = []
        for g in gens:
            rows.append(g.coords if isinstance(g, QuatElement) else tuple(g))
        return cls(algebra, hnf(rows, 4))

    # ---- basic data ---------------------------------------------------
    def rows(self) -> list[list[Fraction]]:
        return self.basis.basis()

    def elements(self) -> list[QuatElement]:
        return [QuatElement(self.algebra, tuple(r)) for r in self.rows()]

    def contains(self, x) -> bool:
        coords = x.coords if isinstance(x, QuatElement) else x
        return self.basis.contains(coords)

    def contains_lattice(self, other: "QuatLattice") -> bool:
        self._same(other)
        return self.basis.contains_lattice(other.basis)

    def _same(self, other: "QuatLattice"):
        if other.algebra != self.algebra:
            raise AlgebraError("lattices belong to different algebras")

    def covolume(self) -> Fraction:
        return self.basis.det()

    @cached_property
    def gram(self) -> list[list[Fraction]]:
        """Gram matrix of the bilinear form B with B(x, x) = nrd(x)."""
        rows = self.rows()
        alg = self.algebra
        return [[alg.bilinear(r, s) for s in rows] for r in rows]

    @cached_property
    def norm(self) -> Fraction:
        """gcd of all values of nrd on the lattice."""
        G = self.gram
        vals = [G[i][i] for i in range(4)] + [2 * G[i][j] for i in range(4) for j in range(i + 1, 4)]
        return rat_gcd(vals)

    @cached_property
    def primitive_gram(self) -> list[list[Fraction]]:
        n = self.norm
        return [[x / n for x in row] for row in self.gram]

    @cached_property
    def hessian(self) -> list[list[int]]:
        """Integer Hessian of nrd/norm(L) (so v^T H v = 2 nrd(v)/norm)."""
        return [[int(2 * x) for x in row] for row in self.primitive_gram]

    @cached_property
    def disc(self) -> int:
        d = mat_det(self.hessian)
        r = isqrt(int(d))
        if r * r != d:
            raise IdealError(f"determinant {d} of the primitive form is not a square")
        return r

    # ---- lattice operations ------------------------------------------
    def __mul__(self, other: "QuatLattice") -> "QuatLattice":
        return lattice_product(self, other)

    def scale(self, c) -> "QuatLattice":
        return QuatLattice(self.algebra, self.basis.scale(c))

    def conj(self) -> "QuatLattice":
        return lattice_conj(self)

    def __add__(self, other: "QuatLattice") -> "QuatLattice":
        self._same(other)
        return QuatLattice(self.algebra, lattice_sum(self.basis, other.basis))

    def intersect(self, other: "QuatLattice") -> "QuatLattice":
        self._same(other)
        return QuatLattice(self.algebra, lattice_intersection(self.basis, other.basis))

    def index_in(self, sup: "QuatLattice") -> int:
        return lattice_index(sup.basis, self.basis)

    def left_mul(self, x: QuatElement) -> "QuatLattice":
        """x * L."""
        return QuatLattice.from_generators(self.algebra, [x * e for e in self.elements()])

    def right_mul(self, x: QuatElement) -> "QuatLattice":
        """L * x."""
        return QuatLattice.from_generators(self.algebra, [e * x for e in self.elements()])

    def is_order(self) -> bool:
        if not self.contains((1, 0, 0, 0)):
            return False
        return self.contains_lattice(self * self)

    def right_order(self) -> "QuatLattice":
        return right_order(self)

    def left_order(self) -> "QuatLattice":
        return left_order(self)

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra.to_json(),
            "basis": [[str(x) for x in r] for r in self.rows()],
            "norm": str(self.norm),
            "disc": self.disc,
        }

    def __repr__(self) -> str:
        return f"QuatLattice({self.algebra.a},{self.algebra.b}; den={self.basis.den}, rows={self.basis.rows})"


def lattice_product(L1: QuatLattice, L2: QuatLattice) -> QuatLattice:
    """Z-span of all pairwise products of basis elements, in canonical form."""
    L1._same(L2)
    alg = L1.algebra
    gens = [alg.mul(r, s) for r in L1.basis.rows for s in L2.basis.rows]
    return QuatLattice(alg, hnf_from_int(gens, L1.basis.den * L2.basis.den, 4))


def lattice_conj(L: QuatLattice) -> QuatLattice:
    rows = [(r[0], -r[1], -r[2], -r[3]) for r in L.basis.rows]
    return QuatLattice(L.algebra, hnf_from_int(rows, L.basis.den, 4))


def lattice_inverse(I: QuatLattice) -> QuatLattice:
    """conj(I) / N(I); for a locally principal ideal I * I^-1 = O_l(I)."""
    n = I.norm
    if n == 0:
        raise DegenerateError("zero lattice")
    return lattice_conj(I).scale(1 / n)


def _mult_matrix(alg: QuatAlgebra, y: Sequence, side: str) -> list[list[Fraction]]:
    """Matrix M with coords(y*x) = x @ M (side='left') or coords(x*y) = x @ M."""
    rows = []
    for k in range(4):
        e = [0, 0, 0, 0]
        e[k] = 1
        prod = alg.mul(y, e) if side == "left" else alg.mul(e, y)
        rows.append([Fraction(c) for c in prod])
    return rows


def _colon(L: QuatLattice, side: str) -> QuatLattice:
    alg = L.algebra
    inv = upper_inverse(L.basis.rows)
    den = L.basis.den
    Binv = [[x * den for x in row] for row in inv]
    gens = []
    for b in L.rows():
        M = _mult_matrix(alg, b, "left" if side == "right" else "right")
        # x in colon  <=>  x @ (M @ Binv) integral
        MB = [[sum(M[r][k] * Binv[k][c] for k in range(4)) for c in range(4)] for r in range(4)]
        for c in range(4):
            gens.append([MB[r][c] for r in range(4)])
    return QuatLattice(alg, dual_of_span(gens))


def right_order(L: QuatLattice) -> QuatLattice:
    """{x : L x subset L}."""
    return _colon(L, "right")


def left_order(L: QuatLattice) -> QuatLattice:
    """{x : x L subset L}."""
    return _colon(L, "left")


def hom_lattice(A: QuatLattice, B: QuatLattice) -> QuatLattice:
    """{u : A u subset B}, computed directly by exact linear algebra."""
    A._same(B)
    alg = A.algebra
    inv = upper_inverse(B.basis.rows)
    den = B.basis.den
    Binv = [[x * den for x in row] for row in inv]
    gens = []
    for a in A.rows():
        M = _mult_matrix(alg, a, "left")
        MB = [[sum(M[r][k] * Binv[k][c] for k in range(4)) for c in range(4)] for r in range(4)]
        for c in range(4):
            gens.append([MB[r][c] for r in range(4)])
    return QuatLattice(alg, dual_of_span(gens))


def standard_order(alg: QuatAlgebra) -> QuatLattice:
    """Z<1, i, j, k>."""
    return QuatLattice.from_generators(alg, [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)])


def lattice_from_json(data: dict) -> QuatLattice:
    alg = QuatAlgebra(int(data["algebra"]["a"]), int(data["algebra"]["b"]))
    rows = [[Fraction(x) for x in r] for r in data["basis"]]
    return QuatLattice(alg, hnf(rows, 4))
