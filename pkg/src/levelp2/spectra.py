"""Joint eigenspaces of the Hecke operators and the two-sided-ideal involutions.

All eigen-data are exact.  A generic integer combination ``T`` of Brandt
operators is formed; for each irreducible factor ``g`` of its characteristic
polynomial the component ``ker(T - alpha)`` is computed over ``Q(alpha)``,
``alpha`` a root of ``g``.  One such component stands for a whole Galois
orbit of isotypic components; real embeddings give the individual ones.
"""

from __future__ import annotations

import random
from math import gcd
from dataclasses import dataclass, field

import numpy as np
import sympy

from .errors import AbsentError, ClassificationError, InternalError, MultiplicityError
from .hecke_ops import BilateralGroup, HeckeData, W_matrix, chi_vector, hecke_primes
from .ideals import ClassList, LeftIdeal, enumerate_classes
from .quatcore import QuatLattice
from .ratlinalg import span_mod_ell
from .numfield import X, NFElem, NumberField, nf_matrix, nf_matvec, nf_nullspace, nf_solve_in_span

DEFAULT_PRIME_CAP = 20
MAX_PRIME_CAP = 100


@dataclass
class Operators:
    """Integer matrices acting on column class vectors."""

    cl: ClassList
    G: BilateralGroup
    p_index: int
    hecke: HeckeData
    t: dict[int, np.ndarray] = field(default_factory=dict)
    Wp: np.ndarray | None = None
    Wt: np.ndarray | None = None

    def t_op(self, ell: int) -> np.ndarray:
        if ell not in self.t:
            self.t[ell] = self.hecke.brandt(ell).operator()
        return self.t[ell]

    def check_commuting(self, primes) -> None:
        ops = [self.t_op(ell) for ell in primes] + [self.Wp, self.Wt]
        for a in range(len(ops)):
            for b in range(a + 1, len(ops)):
                if not np.array_equal(ops[a] @ ops[b], ops[b] @ ops[a]):
                    raise InternalError("operators do not commute")


def build_operators(cl: ClassList, G: BilateralGroup, p_index: int | None = None, hecke: HeckeData | None = None) -> Operators:
    if p_index is None:
        p_index = G.norm_p[0]
    if p_index not in G.norm_p:
        raise ValueError("p_index must be a norm-p two-sided ideal")
    hecke = hecke or HeckeData(cl, DEFAULT_PRIME_CAP)
    ops = Operators(cl, G, p_index, hecke)
    ops.Wp = W_matrix(G, p_index, cl)
    ops.Wt = W_matrix(G, G.wtilde, cl)
    return ops


# ---------------------------------------------------------------------------
# eigenvectors


@dataclass
class EigenVector:
    field: NumberField
    coords: list[NFElem]
    eigen_map: dict[int, NFElem]
    w_p_sign: int
    w_tilde_sign: int
    component: int
    component_dim: int
    classification: str = "unclassified"
    w_rho_sign: int | None = None
    residual: float = 0.0

    @property
    def degree(self) -> int:
        return self.field.degree

    def is_rational(self) -> bool:
        return self.field.degree == 1

    def embeddings(self) -> list[float]:
        return self.field.real_roots()

    def coords_float(self, k: int = 0) -> np.ndarray:
        r = self.embeddings()[k]
        return np.array([c.embed(r) for c in self.coords])

    def eigenvalue_float(self, ell: int, k: int = 0) -> float:
        return self.eigen_map[ell].embed(self.embeddings()[k])

    def integer_coords(self) -> list[int] | None:
        if not self.is_rational():
            return None
        fr = [c.to_fraction() for c in self.coords]
        den = 1
        for f in fr:
            den = den * f.denominator // gcd(den, f.denominator)
        ints = [int(f * den) for f in fr]
        g = 0
        for x in ints:
            g = gcd(g, abs(x))
        ints = [x // g for x in ints]
        first = next(x for x in ints if x)
        return [-x for x in ints] if first < 0 else ints

    def to_json(self) -> dict:
        out = {
            "field": self.field.to_json(),
            "component": self.component,
            "component_dim": self.component_dim,
            "w_p_sign": self.w_p_sign,
            "w_tilde_sign": self.w_tilde_sign,
            "w_rho_sign": self.w_rho_sign,
            "classification": self.classification,
            "eigenvalues": {str(ell): [str(c) for c in lam.coeffs()] for ell, lam in sorted(self.eigen_map.items())},
            "residual": self.residual,
        }
        ic = self.integer_coords()
        if ic is not None:
            out["coords"] = ic
        else:
            out["coords"] = [[str(c) for c in x.coeffs()] for x in self.coords]
        return out


@dataclass
class Component:
    """A Galois orbit of t-isotypic components: ker(T - alpha) over Q(alpha)."""

    index: int
    field: NumberField
    basis: list[list[NFElem]]
    eigen_map: dict[int, NFElem]
    vectors: list[EigenVector]

    @property
    def dim(self) -> int:
        return len(self.basis)


def _restrict(K: NumberField, M: np.ndarray, basis: list[list[NFElem]]) -> list[list[NFElem]]:
    """Matrix of M on span(basis) (M assumed to preserve it); columns = images."""
    Mn = nf_matrix(K, M.tolist())
    cols = []
    for v in basis:
        c = nf_solve_in_span(K, basis, nf_matvec(Mn, v))
        if c is None:
            raise InternalError("operator does not preserve the component")
        cols.append(c)
    k = len(basis)
    return [[cols[j][i] for j in range(k)] for i in range(k)]


def _combine(K: NumberField, basis, coeffs):
    n = len(basis[0])
    return [sum((coeffs[j] * basis[j][i] for j in range(len(basis))), K.zero()) for i in range(n)]


def _scalar_on(K: NumberField, M: np.ndarray, basis) -> NFElem | None:
    """lambda if M acts as lambda on span(basis), else None."""
    try:
        R = _restrict(K, M, basis)
    except InternalError:
        return None
    lam = R[0][0]
    k = len(basis)
    for i in range(k):
        for j in range(k):
            if (i == j and R[i][j] != lam) or (i != j and not R[i][j].is_zero()):
                return None
    return lam


def _normalize_vector(v: list[NFElem]) -> list[NFElem]:
    first = next(x for x in v if not x.is_zero())
    inv = first.inverse()
    return [x * inv for x in v]


def _residual(ev: EigenVector, ops: Operators, primes) -> float:
    worst = 0.0
    for k in range(ev.degree):
        v = ev.coords_float(k)
        scale = max(1.0, float(np.max(np.abs(v))))
        for ell in primes:
            lam = ev.eigen_map[ell].embed(ev.embeddings()[k])
            worst = max(worst, float(np.max(np.abs(ops.t_op(ell) @ v - lam * v))) / scale)
        worst = max(worst, float(np.max(np.abs(ops.Wp @ v - ev.w_p_sign * v))) / scale)
    return worst


def joint_eigenbasis(ops: Operators, prime_cap: int = DEFAULT_PRIME_CAP, seed: int = 1) -> list[Component]:
    """Decompose the class space under {t_ell : ell <= prime_cap, ell != p} and W_p, W_tilde.

    Raises MultiplicityError if some joint eigenspace stays more than one
    dimensional after raising the prime cap to MAX_PRIME_CAP.
    """
    p = ops.G.p
    cap = prime_cap
    while True:
        try:
            return _decompose(ops, hecke_primes(p, cap), seed)
        except MultiplicityError:
            if cap >= MAX_PRIME_CAP:
                raise
            cap = min(MAX_PRIME_CAP, cap * 2)


def _decompose(ops: Operators, primes: list[int], seed: int) -> list[Component]:
    h = ops.cl.h
    ops.hecke.extend(max(primes))
    ops.check_commuting(primes)
    rng = random.Random(seed)
    for _attempt in range(8):
        coeffs = {ell: rng.randint(-9, 9) for ell in primes}
        T = sum(c * ops.t_op(ell) for ell, c in coeffs.items())
        charpoly = sympy.Matrix(T.tolist()).charpoly(X)
        _, factors = sympy.factor_list(charpoly.as_expr(), X)
        comps = []
        generic = True
        for g, mult in factors:
            K = NumberField(sympy.Poly(g, X))
            alpha = K.gen()
            Tn = nf_matrix(K, T.tolist())
            M = [[Tn[i][j] - (alpha if i == j else 0) for j in range(h)] for i in range(h)]
            basis = nf_nullspace(K, M)
            if len(basis) != mult:
                raise InternalError("combination of self-adjoint operators is not semisimple")
            eig = {}
            for ell in primes:
                lam = _scalar_on(K, ops.t_op(ell), basis)
                if lam is None:
                    generic = False
                    break
                eig[ell] = lam
            if not generic:
                break
            comps.append(Component(len(comps), K, basis, eig, []))
        if generic:
            break
    else:
        raise MultiplicityError("no generic combination found")
    if sum(c.dim * c.field.degree for c in comps) != h:
        raise InternalError("components do not fill the space")
    for comp in comps:
        K = comp.field
        Rw = _restrict(K, ops.Wp, comp.basis)
        k = comp.dim
        for sign in (1, -1):
            M = [[Rw[i][j] - (sign if i == j else 0) for j in range(k)] for i in range(k)]
            ker = nf_nullspace(K, M)
            if len(ker) > 1:
                raise MultiplicityError(f"joint eigenspace of dimension {len(ker)}")
            if not ker:
                continue
            v = _normalize_vector(_combine(K, comp.basis, ker[0]))
            wt = _scalar_on(K, ops.Wt, [v])
            if wt is None or not wt.is_rational():
                raise InternalError("W_tilde does not act by a sign")
            ev = EigenVector(K, v, comp.eigen_map, sign, int(wt.to_fraction()), comp.index, comp.dim)
            ev.residual = _residual(ev, ops, primes)
            comp.vectors.append(ev)
        if len(comp.vectors) != comp.dim:
            raise InternalError("W_p does not diagonalize on a component")
    return comps


def all_vectors(comps: list[Component]) -> list[EigenVector]:
    return [v for c in comps for v in c.vectors]


# ---------------------------------------------------------------------------
# old forms and classification


def psi_sublattices(a: LeftIdeal, P: QuatLattice, p: int) -> list[QuatLattice]:
    """The p + 1 lattices P a + Z x, x running over the lines of a / P a (a two-dimensional F_p-space).

    These are the left ideals of the index-p suborder contained in a with the
    same norm; for a = O they are the norm-one two-sided ideals.
    """
    Pa = P * a.lattice
    arows = a.lattice.rows()
    coords = []
    for r in Pa.rows():
        c = a.lattice.basis.coords(r)
        if c is None or any(x.denominator != 1 for x in c):
            raise InternalError("P a is not contained in a")
        coords.append([int(x) % p for x in c])
    S = span_mod_ell(coords, p)
    if len(S) != 2:
        raise InternalError("a / P a is not two-dimensional")
    comp = []
    for e in range(4):
        unit = [1 if k == e else 0 for k in range(4)]
        if len(span_mod_ell(S + comp + [unit], p)) > len(S) + len(comp):
            comp.append(unit)
        if len(comp) == 2:
            break
    u, v = comp
    lines = [[(u[k] + t * v[k]) % p for k in range(4)] for t in range(p)] + [v]
    out = []
    for c in lines:
        x = tuple(sum(c[k] * arows[k][t] for k in range(4)) for t in range(4))
        out.append(QuatLattice.from_generators(Pa.algebra, Pa.rows() + [x]))
    return out


def old_embedding(cl_O: ClassList, cl_Ot: ClassList, P: QuatLattice, p: int) -> np.ndarray:
    """Integer matrix (h_tilde x h_O): the class of a goes to the sum of the classes in Psi(a)."""
    M = np.zeros((cl_Ot.h, cl_O.h), dtype=np.int64)
    for j, a in enumerate(cl_O.reps):
        for L in psi_sublattices(a, P, p):
            b = LeftIdeal(L, cl_Ot.order)
            if b.norm != a.norm:
                raise InternalError("old embedding changes the norm")
            M[cl_Ot.classify(b), j] += 1
    return M


def check_old_equivariance(M: np.ndarray, hecke_O: HeckeData, hecke_Ot: HeckeData, primes) -> bool:
    return all(
        np.array_equal(hecke_Ot.brandt(ell).operator() @ M, M @ hecke_O.brandt(ell).operator()) for ell in primes
    )


def _in_span_rational(K: NumberField, cols: np.ndarray, v: list[NFElem]) -> bool:
    basis = [[K.elem(int(x)) for x in cols[:, j]] for j in range(cols.shape[1])]
    return nf_solve_in_span(K, basis, v) is not None


def classify(ev: EigenVector, old_image: np.ndarray, chi: list[int]) -> str:
    K = ev.field
    is_old = _in_span_rational(K, old_image, ev.coords)
    twisted = [c * x for c, x in zip(chi, ev.coords)]
    is_twist = _in_span_rational(K, old_image, twisted)
    if is_old and is_twist:
        raise ClassificationError("vector is both old and a twist of an old vector")
    return "old" if is_old else ("quadratic-twist" if is_twist else "new")


def w_rho_sign(ev: EigenVector, W_rho: np.ndarray) -> int | None:
    lam = _scalar_on(ev.field, W_rho, [ev.coords])
    if lam is None:
        return None
    return int(lam.to_fraction())


def classify_all(comps: list[Component], ops: Operators, old_image: np.ndarray) -> None:
    chi = chi_vector(ops.cl, ops.G.p)
    W_rho = W_matrix(ops.G, ops.G.rho, ops.cl)
    for ev in all_vectors(comps):
        ev.classification = classify(ev, old_image, chi)
        ev.w_rho_sign = w_rho_sign(ev, W_rho)


def pizer_dimension(classification: str) -> int:
    return {"old": 1, "quadratic-twist": 1, "new": 2}[classification]


def select_e_f(comp: Component) -> EigenVector:
    """The vector of the component fixed by W_p."""
    for ev in comp.vectors:
        if ev.w_p_sign == 1:
            return ev
    raise AbsentError("component has no W_p-fixed vector")


def is_eisenstein(comp: Component) -> bool:
    return all(lam == ell + 1 for ell, lam in comp.eigen_map.items())


@dataclass
class Spectrum:
    """The classified decomposition for one class list and one choice of W_p."""

    ops: Operators
    components: list[Component]
    old_image: np.ndarray

    def vectors(self) -> list[EigenVector]:
        return all_vectors(self.components)

    def new_components(self) -> list[Component]:
        return [c for c in self.components if c.vectors and c.vectors[0].classification == "new"]

    def to_json(self) -> dict:
        return {
            "h": self.ops.cl.h,
            "p_index": self.ops.p_index,
            "old_rank": int(np.linalg.matrix_rank(self.old_image)),
            "components": [
                {
                    "index": c.index,
                    "dim": c.dim,
                    "field": c.field.to_json(),
                    "eisenstein": is_eisenstein(c),
                    "vectors": [v.to_json() for v in c.vectors],
                }
                for c in self.components
            ],
        }


def spectrum(ctx, cl: ClassList, G: BilateralGroup, p_index: int | None = None, cl_O: ClassList | None = None, prime_cap: int = DEFAULT_PRIME_CAP) -> Spectrum:
    """Decompose, build the old image from the maximal order, and classify."""
    ops = build_operators(cl, G, p_index)
    comps = joint_eigenbasis(ops, prime_cap)
    if cl_O is None:
        cl_O = enumerate_classes(ctx.O_max, ctx.p)
    M = old_embedding(cl_O, cl, ctx.P_max, ctx.p)
    classify_all(comps, ops, M)
    for c in comps:
        for v in c.vectors:
            if c.dim != pizer_dimension(v.classification):
                raise InternalError("component dimension disagrees with its classification")
    return Spectrum(ops, comps, M)
