"""Left ideals of a fixed order: neighbours, equivalence, heights and class lists.

All counting goes through the normalized norm form of a lattice, so that two
right-equivalent ideals literally have the same quadratic form values.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .arith import factor, is_prime, legendre, primes_up_to
from .errors import ClassificationError, EnumerationError, IdealError, InputError
from .quatcore import QuatElement, QuatLattice, hom_lattice, lattice_conj, lattice_product
from .ratlinalg import span_mod_ell, value_histogram

FINGERPRINT_BOUND = 12  # values of 2 nrd / N used in the class fingerprint


@dataclass(frozen=True)
class LeftIdeal:
    """A lattice together with the order it is a left ideal for."""

    lattice: QuatLattice
    left_order: QuatLattice = field(compare=False)

    @property
    def norm(self) -> Fraction:
        return self.lattice.norm

    @cached_property
    def right_order(self) -> QuatLattice:
        return self.lattice.right_order()

    def is_integral(self) -> bool:
        return self.left_order.contains_lattice(self.lattice)

    def validate(self) -> None:
        L, O = self.lattice, self.left_order
        if not L.contains_lattice(O * L):
            raise IdealError("lattice is not stable under the left order")
        if L.left_order() != O:
            raise IdealError("left order of the lattice differs from the declared order")
        if self.is_integral() and L.index_in(O) != self.norm**2:
            raise IdealError("norm-index law fails")
        if self.right_order.disc != O.disc:
            raise IdealError("right order has a different discriminant")

    def right_mul(self, x: QuatElement) -> "LeftIdeal":
        return LeftIdeal(self.lattice.right_mul(x), self.left_order)

    def scale(self, c) -> "LeftIdeal":
        return LeftIdeal(self.lattice.scale(c), self.left_order)

    @cached_property
    def fingerprint(self) -> tuple[int, ...]:
        """Representation numbers of the normalized form; a right-equivalence invariant."""
        return tuple(int(c) for c in value_histogram(self.lattice.hessian, FINGERPRINT_BOUND))

    def to_json(self) -> dict:
        return {"lattice": self.lattice.to_json(), "norm": str(self.norm)}


def unit_ideal(O: QuatLattice) -> LeftIdeal:
    return LeftIdeal(O, O)


# ---------------------------------------------------------------------------
# Hom lattices and counts


def hom_lattice_conj(a: LeftIdeal, b: LeftIdeal) -> QuatLattice:
    """a^-1 b computed as conj(a) b / N(a)."""
    return lattice_product(lattice_conj(a.lattice), b.lattice).scale(1 / a.norm)


def hom_lattice_direct(a: LeftIdeal, b: LeftIdeal) -> QuatLattice:
    """{u : a u subset b} by exact linear algebra (independent route)."""
    return hom_lattice(a.lattice, b.lattice)


def _check_same(a: LeftIdeal, b: LeftIdeal):
    if a.left_order != b.left_order:
        raise InputError("ideals have different left orders")


def hom_histogram(a: LeftIdeal, b: LeftIdeal, nmax: int, method: str = "fp") -> np.ndarray:
    """out[n] = #{u in a^-1 b : nrd(u) = n N(b)/N(a)} for 0 <= n <= nmax (full count, not halved)."""
    _check_same(a, b)
    H = hom_lattice_conj(a, b)
    r = b.norm / a.norm
    # v^T hess v = 2 nrd(v) / N(H); nrd = n r  <=>  value = 2 n r / N(H)
    step = 2 * r / H.norm
    out = np.zeros(nmax + 1, dtype=np.int64)
    if step.denominator == 1:
        s = step.numerator
        hist = value_histogram(H.hessian, s * nmax, method=method)
        out[:] = hist[::s][: nmax + 1]
    else:
        # only multiples of the denominator are attainable
        d = step.denominator
        s = step.numerator
        hist = value_histogram(H.hessian, (s * nmax) // d, method=method)
        for n in range(0, nmax + 1, d):
            out[n] = hist[s * n // d]
    return out


def hom_count(a: LeftIdeal, b: LeftIdeal, m: int, method: str = "fp") -> Fraction:
    """1/2 #{u in a^-1 b : nrd(u) = m N(b)/N(a)}."""
    return Fraction(int(hom_histogram(a, b, m, method)[m]), 2)


def height(a: LeftIdeal, b: LeftIdeal) -> Fraction:
    return hom_count(a, b, 1)


def is_equivalent(a: LeftIdeal, b: LeftIdeal) -> bool:
    if a.fingerprint != b.fingerprint:
        return False
    return height(a, b) > 0


# ---------------------------------------------------------------------------
# neighbours


def _left_action_mod(a: LeftIdeal, ell: int) -> list[list[list[int]]]:
    """Matrices (row convention, a-coordinates mod ell) of left multiplication by generators of O."""
    alg = a.lattice.algebra
    arows = a.lattice.rows()
    mats = []
    for o in a.left_order.rows():
        M = []
        for r in arows:
            c = a.lattice.basis.coords(alg.mul(o, r))
            if c is None or any(x.denominator != 1 for x in c):
                raise IdealError("lattice is not a left ideal of its order")
            M.append([int(x) % ell for x in c])
        mats.append(M)
    return mats


def _projective_points(ell: int) -> np.ndarray:
    """Representatives of P^3(F_ell): first nonzero coordinate equal to 1."""
    pts = []
    for lead in range(4):
        tail = 3 - lead
        grid = np.array(list(itertools.product(range(ell), repeat=tail)), dtype=np.int64).reshape(ell**tail, tail)
        block = np.zeros((len(grid), 4), dtype=np.int64)
        block[:, lead] = 1
        block[:, lead + 1 :] = grid
        pts.append(block)
    return np.vstack(pts)


def _isotropic_points(a: LeftIdeal, ell: int) -> np.ndarray:
    """Projective points x of a/ell a with nrd(x)/N(a) = 0 mod ell."""
    H = np.array(a.lattice.hessian, dtype=np.int64)
    X = _projective_points(ell)
    diag = (np.diag(H) // 2) % ell
    q = (X * X) @ diag
    for i in range(4):
        for j in range(i + 1, 4):
            q = q + (H[i, j] % ell) * X[:, i] * X[:, j]
    return X[q % ell == 0]


def _normalize_projective(v, ell: int) -> tuple[int, ...]:
    lead = next(x for x in v if x % ell)
    inv = pow(lead, -1, ell)
    return tuple((x * inv) % ell for x in v)


def t_neighbors(a: LeftIdeal, ell: int) -> list[LeftIdeal]:
    """All b with ell a subset b subset a, [a : b] = ell^2, stable under the left order.

    Modulo ell the quotient a/ell a is a 2 x 2 matrix algebra acting on the
    left; the stable planes are the sets of rank-one matrices with a common
    kernel.  Each isotropic point of the norm form therefore lies in exactly
    one of them, and the plane is the span of its orbit.
    """
    if not is_prime(ell):
        raise InputError(f"{ell} is not prime")
    O = a.left_order
    if O.disc % ell == 0:
        raise InputError(f"{ell} divides the discriminant of the order")
    mats = _left_action_mod(a, ell)
    covered = set()
    planes = []
    for x in _isotropic_points(a, ell).tolist():
        if tuple(x) in covered:
            continue
        imgs = [[sum(x[k] * M[k][c] for k in range(4)) % ell for c in range(4)] for M in mats]
        S = span_mod_ell(imgs + [list(x)], ell)
        if len(S) != 2:
            raise IdealError("isotropic vector does not span a stable plane")
        for s, t in itertools.product(range(ell), repeat=2):
            if s or t:
                covered.add(_normalize_projective([(s * u + t * v) % ell for u, v in zip(*S)], ell))
        planes.append(S)
    arows = a.lattice.rows()
    out = []
    for S in planes:
        gens = [tuple(ell * v for v in r) for r in arows]
        gens += [tuple(sum(s[k] * arows[k][t] for k in range(4)) for t in range(4)) for s in S]
        b = LeftIdeal(QuatLattice.from_generators(a.lattice.algebra, gens), O)
        if b.norm != ell * a.norm:
            raise IdealError("neighbour has the wrong norm")
        out.append(b)
    out.sort(key=lambda b: (b.lattice.basis.den, b.lattice.basis.rows))
    if len(out) != ell + 1:
        raise IdealError(f"found {len(out)} neighbours at {ell}, expected {ell + 1}")
    return out


def t_neighbors_scan(a: LeftIdeal, ell: int) -> list[LeftIdeal]:
    """Reference version: test the orbit span of every nonzero vector of a/ell a."""
    O = a.left_order
    mats = _left_action_mod(a, ell)
    seen = {}
    for x in itertools.product(range(ell), repeat=4):
        if not any(x):
            continue
        imgs = [[sum(x[k] * M[k][c] for k in range(4)) % ell for c in range(4)] for M in mats]
        S = span_mod_ell(imgs + [list(x)], ell)
        if len(S) == 2:
            seen.setdefault(tuple(tuple(r) for r in S), S)
    arows = a.lattice.rows()
    out = []
    for S in seen.values():
        gens = [tuple(ell * v for v in r) for r in arows]
        gens += [tuple(sum(s[k] * arows[k][t] for k in range(4)) for t in range(4)) for s in S]
        out.append(LeftIdeal(QuatLattice.from_generators(a.lattice.algebra, gens), O))
    out.sort(key=lambda b: (b.lattice.basis.den, b.lattice.basis.rows))
    return out


def _dedup(ideals):
    seen = {}
    for b in ideals:
        seen.setdefault(b.lattice, b)
    return list(seen.values())


def t_m_ideals(a: LeftIdeal, m: int) -> list[LeftIdeal]:
    """Explicit T_m(a) = {b subset a left ideal : N(b) = m N(a)} for m prime to the level."""

    if m == 1:
        return [a]
    current = [a]
    for ell, e in factor(m):
        nxt = []
        for c in current:
            nxt.extend(_t_prime_power(c, ell, e))
        current = _dedup(nxt)
    return current


def _t_prime_power(a: LeftIdeal, ell: int, e: int) -> list[LeftIdeal]:
    if e == 0:
        return [a]
    out = []
    for c in t_neighbors(a, ell):
        out.extend(_t_prime_power(c, ell, e - 1))
    return _dedup(out)


# ---------------------------------------------------------------------------
# class lists


@dataclass
class ClassList:
    """Representatives of left ideal classes together with their weights."""

    order: QuatLattice
    reps: list[LeftIdeal]
    weights: list[Fraction]
    generator_primes: tuple[int, ...] = ()
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            for i, r in enumerate(self.reps):
                self._index.setdefault(r.fingerprint, []).append(i)

    @property
    def h(self) -> int:
        return len(self.reps)

    def classify(self, b: LeftIdeal) -> int:
        """Index of the class of b."""
        for i in self._index.get(b.fingerprint, []):
            if height(self.reps[i], b) > 0:
                return i
        raise ClassificationError("ideal does not lie in any listed class")

    def try_classify(self, b: LeftIdeal) -> int | None:
        try:
            return self.classify(b)
        except ClassificationError:
            return None

    def append(self, b: LeftIdeal, weight: Fraction) -> None:
        self.reps.append(b)
        self.weights.append(weight)
        self._index.setdefault(b.fingerprint, []).append(len(self.reps) - 1)

    def mass(self) -> Fraction:
        """Sum of 1/w_i."""
        return sum((1 / w for w in self.weights), Fraction(0))

    def to_json(self) -> dict:
        return {
            "h": self.h,
            "weights": [f"{w.numerator}/{w.denominator}" for w in self.weights],
            "mass": str(self.mass()),
            "generator_primes": list(self.generator_primes),
            "reps": [r.to_json() for r in self.reps],
        }


def default_generator_primes(p: int, count: int = 2) -> tuple[int, ...]:
    """The first ``count`` primes other than p, plus a non-square mod p if none is among them."""

    cand = [ell for ell in primes_up_to(1000) if ell != p]
    out = cand[:count]
    if all(legendre(ell, p) == 1 for ell in out):
        out.append(next(ell for ell in cand if legendre(ell, p) == -1))
    return tuple(out)


def enumerate_classes(
    O: QuatLattice,
    p: int,
    primes: tuple[int, ...] | None = None,
    seeds: list[QuatLattice] = (),
    cap: int = 5000,
) -> ClassList:
    """Breadth-first closure of the unit class (and optional seed ideals) under neighbours.

    Neighbours at a prime that is a square mod p never change the character
    chi, so a prime set made only of squares reaches half of the classes of
    the level p^2 order.  Seeding with an ideal of character -1 (for example a
    norm-one two-sided ideal) restores the full list.
    """
    if primes is None:
        primes = default_generator_primes(p)
    cl = ClassList(O, [], [], tuple(primes))
    queue = deque()
    for L in [O, *seeds]:
        s = LeftIdeal(L, O)
        if cl.try_classify(s) is None:
            cl.append(s, height(s, s))
            queue.append(s)
    while queue:
        a = queue.popleft()
        for ell in primes:
            for b in t_neighbors(a, ell):
                if cl.try_classify(b) is None:
                    cl.append(b, height(b, b))
                    queue.append(b)
                    if cl.h > cap:
                        raise EnumerationError(f"more than {cap} classes; enumeration aborted")
    return cl


def same_classes(c1: ClassList, c2: ClassList) -> bool:
    """True when two class lists describe the same set of classes."""
    if c1.h != c2.h:
        return False
    return all(c2.try_classify(r) is not None for r in c1.reps)
