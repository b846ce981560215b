"""Special points: embeddings of O_K into the right orders of ideal classes.

A special point is represented by a class index ``i`` and a witness
``x`` in the right order of ``a_i`` with the minimal polynomial of
``omega_D = (p + sqrt D)/2``.  Witnesses are grouped into orbits under
conjugation by the units of that right order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import legendre
from .errors import InputError, TheoremViolation
from .hecke_ops import BilateralGroup, W_apply
from .ideals import ClassList, LeftIdeal
from .orders_p2 import LevelP2Context
from .quadfield import FieldK, k_prime_ideal
from .quatcore import QuatLattice, lattice_conj
from .ratlinalg import HNFBasis, enumerate_by_value


def _omega_data(D: int, p: int) -> tuple[int, Fraction]:
    """(trace, reduced norm) of (p + sqrt D)/2."""
    return p, Fraction(p * p - D, 4)


def lattice_elements_with_nrd(L: QuatLattice, n) -> list[tuple[Fraction, ...]]:
    rows = L.rows()
    out = []
    for v in enumerate_by_value(L.gram, n):
        out.append(tuple(sum((v[k] * rows[k][t] for k in range(4)), Fraction(0)) for t in range(4)))
    return out


def elements_with(L: QuatLattice, trace: int, nrd) -> list[tuple[Fraction, ...]]:
    """All x in L with tr x = trace and nrd x = nrd (a finite set)."""
    return sorted(x for x in lattice_elements_with_nrd(L, nrd) if 2 * x[0] == trace)


def unit_group(O: QuatLattice) -> list[tuple[Fraction, ...]]:
    return lattice_elements_with_nrd(O, 1)


def _conjugate(alg, u, x):
    ubar = (u[0], -u[1], -u[2], -u[3])
    return alg.mul(alg.mul(u, x), ubar)  # u x u^-1, nrd u = 1


@dataclass(frozen=True)
class SpecialPoint:
    class_index: int
    witness: tuple
    orbit: tuple  # sorted witnesses in the unit-conjugation orbit

    def to_json(self) -> dict:
        return {"class": self.class_index, "witness": [str(c) for c in self.witness], "orbit_size": len(self.orbit)}


def class_special_points(cl: ClassList, i: int, D: int, p: int) -> list[SpecialPoint]:
    """Orbits of witnesses in O_r(a_i), labeled by their smallest witness."""
    a = cl.reps[i]
    Or = a.right_order
    tr, n = _omega_data(D, p)
    xs = elements_with(Or, tr, n)
    units = unit_group(Or)
    alg = Or.algebra
    seen = set()
    out = []
    for x in xs:
        if x in seen:
            continue
        orbit = tuple(sorted({_conjugate(alg, u, x) for u in units}))
        seen.update(orbit)
        out.append(SpecialPoint(i, orbit[0], orbit))
    return out


def special_points(cl: ClassList, D: int, p: int, expected: int | None = None) -> list[SpecialPoint]:
    """All special points over a class list; ``expected`` is the predicted orbit count."""
    if D % p:
        raise InputError(f"p = {p} must divide D = {D}")
    pts = []
    for i in range(cl.h):
        pts.extend(class_special_points(cl, i, D, p))
    if expected is not None and len(pts) != expected:
        raise TheoremViolation(f"found {len(pts)} special points, expected {expected}")
    return pts


def expected_count(D: int, p: int, level: str = "tilde") -> int:
    """(p+1) h_D for the level p^2 order, h_D for the maximal order."""
    h = FieldK(D, p).h
    return (p + 1) * h if level == "tilde" else h


# ---------------------------------------------------------------------------
# the cells C_p


def conjugated_ideal(b: LeftIdeal, P: QuatLattice) -> QuatLattice:
    """b^-1 P b = conj(b) P b / N(b)."""
    return (lattice_conj(b.lattice) * P * b.lattice).scale(1 / b.norm)


def z_plus(L: QuatLattice) -> QuatLattice:
    one = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
    return QuatLattice.from_generators(L.algebra, L.rows() + [one])


@dataclass
class CPSplit:
    """For each norm-p two-sided ideal (group index) the special points in its cell."""

    cells: dict[int, list[int]]
    chi: dict[int, int]
    d: int
    h_D: int
    points: list[SpecialPoint] = field(repr=False, default_factory=list)

    def sizes(self) -> dict[int, int]:
        return {s: len(v) for s, v in self.cells.items()}

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "h_D": self.h_D,
            "cells": {str(s): v for s, v in self.cells.items()},
            "chi": {str(s): c for s, c in self.chi.items()},
        }


def split_C_p(cl: ClassList, G: BilateralGroup, points: list[SpecialPoint], D: int) -> CPSplit:
    """Distribute points into cells and check the partition and emptiness laws."""
    p = G.p
    d = -D // p
    h_D = FieldK(D, p).h
    cells: dict[int, list[int]] = {s: [] for s in G.norm_p}
    zl_cache = {}
    for k, pt in enumerate(points):
        hits = []
        for s in G.norm_p:
            key = (pt.class_index, s)
            if key not in zl_cache:
                zl_cache[key] = z_plus(conjugated_ideal(cl.reps[pt.class_index], G.elements[s]))
            if zl_cache[key].contains(pt.witness):
                hits.append(s)
        if len(hits) != 1:
            raise TheoremViolation(f"special point lies in {len(hits)} cells")
        cells[hits[0]].append(k)
    chi = {s: G.chi[s] for s in G.norm_p}
    target = legendre(d, p)
    for s, v in cells.items():
        if chi[s] != target and v:
            raise TheoremViolation("cell with the wrong character is nonempty")
        if chi[s] == target and len(v) != 2 * h_D:
            raise TheoremViolation(f"cell has {len(v)} points, expected {2 * h_D}")
    return CPSplit(cells, chi, d, h_D, points)


def c_d_raw(cl: ClassList, P: QuatLattice, D: int, p: int) -> list[Fraction]:
    """c_{d,P}(b) = 1/2 #{x in Z + b^-1 P b : tr x = p, nrd x = (p^2 - D)/4} for each class."""
    tr, n = _omega_data(D, p)
    return [Fraction(len(elements_with(z_plus(conjugated_ideal(b, P)), tr, n)), 2) for b in cl.reps]


def c_d_vector(cl: ClassList, P: QuatLattice, D: int, p: int) -> list[Fraction]:
    """The class vector with coordinates c_{d,P}(a_i)/w_i."""
    return [c / w for c, w in zip(c_d_raw(cl, P, D, p), cl.weights)]


# ---------------------------------------------------------------------------
# the vector c_1 in the K-aligned setting


def ideal_from_K(ctx: LevelP2Context, A: HNFBasis) -> QuatLattice:
    """O_tilde i(A) for a K-ideal A given in (1, sqrt D) coordinates."""
    if ctx.kdata is None:
        raise InputError("context is not K-aligned")
    alg = ctx.algebra
    gens = [ctx.kdata.embed(*a) for a in A.basis()]
    return QuatLattice.from_generators(alg, [alg.mul(o, g) for o in ctx.O_tilde.rows() for g in gens])


def c1_vector(ctx: LevelP2Context, cl: ClassList, K: FieldK | None = None) -> list[int]:
    """sum over the class group of K of the class of O_tilde i(a)."""
    if ctx.kdata is None:
        raise InputError("context is not K-aligned")
    if K is None:
        K = FieldK(ctx.kdata.D, ctx.p)
    out = [0] * cl.h
    for A in K.ideal_reps():
        out[cl.classify(LeftIdeal(ideal_from_K(ctx, A), ctx.O_tilde))] += 1
    return out


def half_one_plus_W(G: BilateralGroup, cl: ClassList, v, g: int | None = None) -> list[Fraction]:
    """1/2 (v + W_g v), default g = W_tilde."""
    g = G.wtilde if g is None else g
    Wv = W_apply(G, g, cl, list(v))
    return [Fraction(a + b, 2) for a, b in zip(v, Wv)]


def matching_cells(G: BilateralGroup, d: int) -> list[int]:
    """Norm-p two-sided ideals whose character equals (d|p)."""
    t = legendre(d, G.p)
    return [s for s in G.norm_p if G.chi[s] == t]


def p0_index(ctx: LevelP2Context, G: BilateralGroup) -> int:
    """Group index of the two-sided ideal O_tilde i(p_K), p_K the prime of K above p."""
    L = ideal_from_K(ctx, k_prime_ideal(ctx.kdata.D, ctx.p))
    return G.index_of(L)
