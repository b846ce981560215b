"""Orders of reduced discriminant p and p^2 in the quaternion algebra ramified at p.

Everything here works with concrete lattices in coordinates ``1, i, j, k``.
The main entry points are :func:`build_context` (generic algebra from
:func:`build_algebra`) and :func:`build_context_from_K` (the algebra ``(D, -q)``
aligned with an imaginary quadratic field).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .arith import is_fundamental_discriminant, is_prime, legendre, prime_divisors, primes_up_to, valuation
from .errors import ConstructionError, IdealError, InputError, InternalError, SearchExhausted, WitnessError
from .quatcore import QuatAlgebra, QuatElement, QuatLattice, standard_order
from .quadfield import k_conj, k_lattice, k_maximal_order, k_prime_ideal, k_product
from .ratlinalg import HNFBasis, dual_of_span, kernel_mod_ell, mat_mul, span_mod_ell

INF = 0  # the real place, as used by hilbert_symbol and ramified_places


# ---------------------------------------------------------------------------
# Hilbert symbols


def _to_int_square_class(x) -> int:
    x = Fraction(x)
    if x == 0:
        raise InputError("Hilbert symbol of zero")
    return x.numerator * x.denominator


def hilbert_symbol(a, b, place: int) -> int:
    """Local Hilbert symbol (a, b)_v.  ``place`` is a prime or 0 for the real place."""
    a = _to_int_square_class(a)
    b = _to_int_square_class(b)
    if place == INF:
        return -1 if (a < 0 and b < 0) else 1
    ell = place
    if not is_prime(ell):
        raise InputError(f"{ell} is not a prime")
    alpha, beta = valuation(a, ell), valuation(b, ell)
    u, v = a // ell**alpha, b // ell**beta
    if ell != 2:
        sign = -1 if (alpha * beta * ((ell - 1) // 2)) % 2 else 1
        if beta % 2:
            sign *= legendre(u, ell)
        if alpha % 2:
            sign *= legendre(v, ell)
        return sign

    def eps(n):
        return ((n - 1) // 2) % 2

    def omega(n):
        return ((n * n - 1) // 8) % 2

    e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
    return -1 if e % 2 else 1


def ramified_places(a, b) -> tuple[int, ...]:
    """Places where (a, b) ramifies; 0 stands for the real place."""
    a_i, b_i = _to_int_square_class(a), _to_int_square_class(b)
    places = [INF] + prime_divisors(2 * a_i * b_i)
    return tuple(v for v in places if hilbert_symbol(a_i, b_i, v) == -1)


# ---------------------------------------------------------------------------
# the algebra and its maximal order


def build_algebra(p: int) -> QuatAlgebra:
    """A definite algebra ramified exactly at p and infinity."""
    if p == 2 or not is_prime(p):
        raise InputError(f"p = {p} must be an odd prime")
    if p % 4 == 3:
        alg = QuatAlgebra(-1, -p)
    elif p % 8 == 5:
        alg = QuatAlgebra(-2, -p)
    else:
        q = 3
        while not (q % 4 == 3 and legendre(q, p) == -1):
            q = _next_prime(q)
        alg = QuatAlgebra(-q, -p)
    if ramified_places(alg.a, alg.b) != (INF, p):
        raise InternalError(f"algebra {alg} does not ramify at exactly {{{p}, inf}}")
    return alg


def _next_prime(n: int) -> int:
    n += 1
    while not is_prime(n):
        n += 1
    return n


def _adjoin(L: QuatLattice, gens) -> QuatLattice:
    """The lattice spanned by L and the given elements."""
    return QuatLattice.from_generators(L.algebra, [tuple(r) for r in L.rows()] + [tuple(g) for g in gens])


def _is_integral_order(L: QuatLattice) -> bool:
    if not L.contains((1, 0, 0, 0)):
        return False
    if any(Fraction(2 * r[0]).denominator != 1 for r in L.rows()):
        return False
    return L.norm.denominator == 1


def _ring_closure(L: QuatLattice, max_rounds: int = 8) -> QuatLattice | None:
    """Smallest ring containing L, or None once integrality is lost."""
    for _ in range(max_rounds):
        if not _is_integral_order_candidate(L):
            return None
        M = L + L * L
        if M == L:
            return L if _is_integral_order(L) else None
        L = M
    return None


def _is_integral_order_candidate(L: QuatLattice) -> bool:
    return all(Fraction(2 * r[0]).denominator == 1 for r in L.rows()) and L.norm.denominator == 1


def maximal_order(B: QuatAlgebra) -> QuatLattice:
    """Saturate Z<1,i,j,k> prime by prime until the discriminant is the ramified product."""
    target = 1
    for v in ramified_places(B.a, B.b):
        if v != INF:
            target *= v
    L = standard_order(B)
    for _ in range(64):
        d = L.disc
        if d == target:
            return L
        if d % target:
            raise ConstructionError(f"discriminant {d} is not a multiple of {target}")
        ell = prime_divisors(d // target)[0]
        L = _saturate_once(L, ell)
    raise ConstructionError("saturation did not terminate")


def _saturate_once(L: QuatLattice, ell: int) -> QuatLattice:
    rows = L.rows()
    d0 = L.disc
    for c in itertools.product(range(ell), repeat=4):
        if not any(c):
            continue
        x = tuple(sum(Fraction(c[k], ell) * rows[k][t] for k in range(4)) for t in range(4))
        if Fraction(2 * x[0]).denominator != 1 or Fraction(L.algebra.nrd(x)).denominator != 1:
            continue
        bigger = _adjoin(L, [x])
        M = _ring_closure(bigger)
        if M is not None and M.disc < d0:
            return M
    raise ConstructionError(f"no integral overorder found at {ell}; order is maximal at {ell}")


# ---------------------------------------------------------------------------
# residue computations on O / pO


def _lift(O: QuatLattice, vec) -> tuple:
    """Element of O with the given integer coordinates in O's HNF basis."""
    rows = O.rows()
    return tuple(sum(Fraction(int(vec[k])) * rows[k][t] for k in range(4)) for t in range(4))


def _int_gram_mod(O: QuatLattice, scale: int = 2) -> list[list[int]]:
    G = O.gram
    return [[int(scale * x) for x in row] for row in G]


def _trace_vector(O: QuatLattice) -> list[int]:
    return [int(2 * r[0]) for r in O.rows()]


def _residues(p: int) -> np.ndarray:
    return np.array(list(itertools.product(range(p), repeat=4)), dtype=np.int64)


def nrd_zero_set(O: QuatLattice, p: int) -> np.ndarray:
    """All residues v in O/pO (in O-coordinates) with nrd(v) = 0 mod p, by a full scan."""
    H = np.array(_int_gram_mod(O), dtype=np.int64)  # v^T H v = 2 nrd(v)
    V = _residues(p)
    vals = np.einsum("ni,ij,nj->n", V, H, V) % p
    return V[vals == 0]


def _assert_subspace(Z: np.ndarray, p: int, dim: int, what: str) -> list[list[int]]:
    basis = span_mod_ell(Z.tolist(), p)
    if len(basis) != dim or len(Z) != p**dim:
        raise InternalError(f"{what}: zero set of size {len(Z)} is not a {dim}-dimensional subspace")
    return basis


def _from_residue_basis(O: QuatLattice, p: int, basis: list[list[int]], extra=()) -> QuatLattice:
    gens = [tuple(p * x for x in r) for r in O.rows()]
    gens += [_lift(O, v) for v in basis]
    gens += list(extra)
    return QuatLattice.from_generators(O.algebra, gens)


def bilateral_norm_p_of_max(O: QuatLattice, p: int | None = None) -> QuatLattice:
    """The two-sided ideal P of O with P^2 = pO (p the ramified prime)."""
    if p is None:
        p = O.disc
    if O.disc != p:
        raise InputError("expected an order of discriminant p")
    Z = nrd_zero_set(O, p)
    basis = _assert_subspace(Z, p, 2, "nrd mod p")
    P = _from_residue_basis(O, p, basis)
    if P * P != O.scale(p):
        raise InternalError("P^2 != pO")
    return P


def _delta_kernel(O: QuatLattice, p: int) -> list[list[int]]:
    """Kernel mod p of the Hessian of x -> tr(x)^2 - 4 nrd(x) on O-coordinates."""
    t = _trace_vector(O)
    G2 = _int_gram_mod(O)  # 2 * Gram
    # Hessian of Delta is 2 t t^T - 8 G; drop the invertible factor 2
    M = [[(t[r] * t[c] - 2 * G2[r][c]) % p for c in range(4)] for r in range(4)]
    return kernel_mod_ell(M, p)


def sub_order_tilde(O: QuatLattice, p: int) -> QuatLattice:
    """The unique suborder of index p, {x in O : p | Delta(x)}, built two ways and compared."""
    ker = _delta_kernel(O, p)
    if len(ker) != 3:
        raise InternalError(f"Delta-kernel mod {p} has dimension {len(ker)}, expected 3")
    route1 = _from_residue_basis(O, p, ker)
    P = bilateral_norm_p_of_max(O, p)
    route2 = _adjoin(P, [(1, 0, 0, 0)])
    if route1 != route2:
        raise InternalError("the two constructions of the index-p suborder disagree")
    if route1.index_in(O) != p or route1.disc != p * p or not route1.is_order():
        raise InternalError("index-p suborder fails its invariants")
    return route1


def delta_divisible_scan(O: QuatLattice, p: int) -> np.ndarray:
    """Residues of O/pO with p | Delta, by brute force (used as an oracle)."""
    t = np.array(_trace_vector(O), dtype=np.int64)
    H = np.array(_int_gram_mod(O), dtype=np.int64)
    V = _residues(p)
    tr = V @ t
    nrd2 = np.einsum("ni,ij,nj->n", V, H, V)  # 2 nrd
    delta2 = 2 * tr * tr - 4 * nrd2  # 2 Delta
    return V[(delta2 % p) == 0]


# ---------------------------------------------------------------------------
# characters


def _small_combinations(n: int, bound: int):
    rng = range(-bound, bound + 1)
    for c in itertools.product(rng, repeat=n):
        if any(c):
            yield c


def char_chi_lattice(I: QuatLattice, p: int, witnesses: int = 1) -> int:
    """Legendre(nrd(x)/N(I), p) for some x in I with p not dividing nrd(x)/N(I).

    With ``witnesses > 1`` several independent witnesses are tried and must agree.
    """
    rows = I.rows()
    N = I.norm
    found = []
    for c in _small_combinations(4, 2):
        x = tuple(sum(c[k] * rows[k][t] for k in range(4)) for t in range(4))
        v = Fraction(I.algebra.nrd(x)) / N
        if v.denominator != 1:
            raise IdealError("nrd/N is not integral; is the input a lattice?")
        if v.numerator % p:
            found.append(legendre(v.numerator, p))
            if len(found) >= witnesses:
                break
    if not found:
        raise WitnessError("no element with norm prime to p found")
    if len(set(found)) != 1:
        raise InternalError("character depends on the witness")
    return found[0]


def char_chi_suborder(Op: QuatLattice, p: int, witnesses: int = 1) -> int:
    """Legendre(-Delta(x)/p, p) for some x in the suborder with p || Delta(x)."""
    rows = Op.rows()
    found = []
    for c in _small_combinations(4, 2):
        x = QuatElement(Op.algebra, tuple(sum(c[k] * rows[k][t] for k in range(4)) for t in range(4)))
        d = x.delta()
        if d.denominator != 1:
            raise IdealError("Delta(x) not integral; is the input an order?")
        d = d.numerator
        if d != 0 and d % p == 0 and (d // p) % p:
            found.append(legendre(-d // p, p))
            if len(found) >= witnesses:
                break
    if not found:
        raise WitnessError("no element with p exactly dividing Delta found")
    if len(set(found)) != 1:
        raise InternalError("character depends on the witness")
    return found[0]


# ---------------------------------------------------------------------------
# suborders of index p in O_tilde and the matching bilateral ideals


@dataclass(frozen=True)
class SubOrderP3:
    """A suborder Z + frak_p of index p in O_tilde, with its source ideal and character."""

    order: QuatLattice
    source_ideal: QuatLattice
    character_sign: int


def _complement_lines(space: list[list[int]], fixed: list[list[int]], p: int) -> list[list[int]]:
    """Representatives of the lines in span(space)/span(fixed), which must be 2-dimensional."""
    basis = []
    cur = [list(v) for v in fixed]
    for v in space:
        if len(span_mod_ell(cur + [v], p)) > len(span_mod_ell(cur, p)) if cur else any(x % p for x in v):
            basis.append(v)
            cur.append(v)
    if len(basis) != 2:
        raise InternalError(f"quotient has dimension {len(basis)}, expected 2")
    s, t = basis
    lines = [s] + [[(t[k] + c * s[k]) % p for k in range(4)] for c in range(p)]
    return lines


def suborder_from_bilateral(frak_p: QuatLattice, O_tilde: QuatLattice, p: int) -> SubOrderP3:
    if not is_bilateral(frak_p, O_tilde) or frak_p.norm != p:
        raise IdealError("input is not a norm-p bilateral ideal of O_tilde")
    order = _adjoin(frak_p, [(1, 0, 0, 0)])
    if not order.is_order() or order.disc != p**3:
        raise InternalError("Z + frak_p is not an order of discriminant p^3")
    return SubOrderP3(order, frak_p, char_chi_lattice(frak_p, p))


def bilateral_from_suborder(Op: QuatLattice, O_tilde: QuatLattice, p: int) -> QuatLattice:
    """{x in O' : p | tr(x)}."""
    if not Op.is_order() or not O_tilde.contains_lattice(Op) or Op.index_in(O_tilde) != p:
        raise IdealError("input is not an index-p suborder of O_tilde")
    t = [[int(2 * r[0]) % p for r in Op.rows()]]
    ker = kernel_mod_ell(t, p)
    L = _from_residue_basis(Op, p, ker)
    if not is_bilateral(L, O_tilde) or L.norm != p:
        raise InternalError("trace-divisible part of a suborder is not a norm-p bilateral ideal")
    return L


def is_bilateral(L: QuatLattice, O: QuatLattice) -> bool:
    return L.left_order() == O and L.right_order() == O


def _one_coords_mod(O: QuatLattice, p: int) -> list[int]:
    c = O.basis.coords((1, 0, 0, 0))
    return [int(x) % p for x in c]


def enumerate_suborders(ctx: "LevelP2Context") -> list[SubOrderP3]:
    """All p+1 suborders of index p in O_tilde, in a fixed order."""
    O, p = ctx.O_max, ctx.p
    ker = _delta_kernel(O, p)
    one = _one_coords_mod(O, p)
    lines = _complement_lines(ker, [one], p)
    base = [tuple(p * x for x in r) for r in O.rows()] + [(1, 0, 0, 0)]
    out = []
    for w in lines:
        Op = QuatLattice.from_generators(O.algebra, base + [_lift(O, w)])
        frak_p = bilateral_from_suborder(Op, ctx.O_tilde, p)
        out.append(SubOrderP3(Op, frak_p, char_chi_lattice(frak_p, p)))
    return out


def norm_one_bilaterals(ctx: "LevelP2Context") -> list[QuatLattice]:
    """The p+1 bilateral O_tilde-ideals of norm 1: lattices between P_max and O of index p in O."""
    O, p = ctx.O_max, ctx.p
    P = ctx.P_max
    pcoords = [[int(x) % p for x in O.basis.coords(r)] for r in P.rows()]
    pspan = span_mod_ell(pcoords, p)
    std = [[1 if k == t else 0 for k in range(4)] for t in range(4)]
    lines = _complement_lines(std, pspan, p)
    out = []
    for w in lines:
        L = _adjoin(P, [_lift(O, w)])
        if L.norm != 1 or not is_bilateral(L, ctx.O_tilde):
            raise InternalError("norm-one candidate is not a bilateral ideal")
        out.append(L)
    return out


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class KData:
    """Data of the K-aligned construction: K = Q(sqrt D) embedded via i -> sqrt D."""

    D: int
    q: int
    D0: int
    omega: tuple  # (p + sqrt D)/2 in quaternion coordinates

    def embed(self, x, y) -> tuple:
        """x + y sqrt(D) as a quaternion."""
        return (Fraction(x), Fraction(y), Fraction(0), Fraction(0))


@dataclass(frozen=True)
class LevelP2Context:
    p: int
    algebra: QuatAlgebra
    O_max: QuatLattice
    O_tilde: QuatLattice
    P_max: QuatLattice
    kdata: KData | None = field(default=None, compare=False)

    @cached_property
    def suborders(self) -> list[SubOrderP3]:
        return enumerate_suborders(self)

    @cached_property
    def norm_one(self) -> list[QuatLattice]:
        return norm_one_bilaterals(self)

    def validate(self) -> None:
        p = self.p
        if self.O_max.disc != p or self.O_tilde.disc != p * p:
            raise InternalError("discriminants are wrong")
        if self.O_tilde.index_in(self.O_max) != p:
            raise InternalError("[O : O_tilde] != p")
        if self.P_max * self.P_max != self.O_max.scale(p):
            raise InternalError("P^2 != pO")

    def to_json(self) -> dict:
        out = {
            "p": self.p,
            "algebra": self.algebra.to_json(),
            "O_max": self.O_max.to_json(),
            "O_tilde": self.O_tilde.to_json(),
            "P_max": self.P_max.to_json(),
        }
        if self.kdata is not None:
            k = self.kdata
            out["K"] = {"D": k.D, "q": k.q, "D0": k.D0, "omega": [str(c) for c in k.omega]}
        return out


def build_context(p: int) -> LevelP2Context:
    alg = build_algebra(p)
    O = maximal_order(alg)
    Ot = sub_order_tilde(O, p)
    P = bilateral_norm_p_of_max(O, p)
    ctx = LevelP2Context(p, alg, O, Ot, P)
    ctx.validate()
    return ctx


# ---------------------------------------------------------------------------
# the K-aligned construction


def _p_star(p: int) -> int:
    return p if p % 4 == 1 else -p


def choose_q(D: int, p: int, cap: int = 10**6) -> int:
    """Smallest prime q with q not dividing 2D, (-q|p) = -1 and q = -1 mod |D0|."""
    if D >= 0 or D % 2 == 0 or not is_fundamental_discriminant(D):
        raise InputError(f"D = {D} must be a negative odd fundamental discriminant")
    if D % p:
        raise InputError(f"p = {p} does not divide D = {D}")
    D0 = D // _p_star(p)
    m = abs(D0)
    for q in primes_up_to(cap):
        if (2 * D) % q == 0:
            continue
        if legendre(-q, p) != -1:
            continue
        if (q + 1) % m:
            continue
        return q
    raise SearchExhausted(f"no admissible q below {cap}")


def build_orders_from_K(D: int, p: int, q: int):
    """Explicit maximal order O and its index-p suborder in (D, -q).

    Returns ``(algebra, O, O_tilde, kdata)``.  The lattices are realised as
    preimages of the congruence ``alpha - q beta in O_K`` inside the direct
    sum of two K-lattices.
    """
    if D % p or not is_prime(q):
        raise InputError("need p | D and q prime")
    alg = QuatAlgebra(D, -q)
    D0 = D // _p_star(p)
    m = abs(D0)
    OK = k_maximal_order(D)
    half = Fraction(1, 2)
    if m == 1:
        Dinv = OK
    else:
        frak_D0 = k_lattice([(m, 0), (Fraction(m, 2), half)])
        Dinv = HNFBasis(frak_D0.rows, frak_D0.den * m)
    frak_q = k_prime_ideal(D, q)
    q_inv = HNFBasis(k_conj(frak_q).rows, k_conj(frak_q).den * q)
    frak_pK = k_prime_ideal(D, p)
    B1 = k_product(D, Dinv, q_inv)
    B2 = k_product(D, B1, frak_pK)

    def congruence_lattice(Bj: HNFBasis) -> QuatLattice:
        A_rows = Dinv.basis()
        B_rows = Bj.basis()
        # ambient basis: alpha-part then beta j (beta = x + y sqrt D -> x j + y k)
        amb = [(r[0], r[1], Fraction(0), Fraction(0)) for r in A_rows]
        amb += [(Fraction(0), Fraction(0), r[0], r[1]) for r in B_rows]
        # functionals: O_K-coordinates of alpha - q beta
        ok_rows = OK.basis()
        ok_inv = _inv2(ok_rows)
        images = [tuple(r) for r in A_rows] + [(-q * r[0], -q * r[1]) for r in B_rows]
        coords = [mat_mul([list(v)], ok_inv)[0] for v in images]
        funcs = [[coords[s][f] for s in range(4)] for f in range(2)]
        std = [[Fraction(int(s == t)) for t in range(4)] for s in range(4)]
        sub = dual_of_span(std + funcs)
        gens = [tuple(sum(row[s] * amb[s][t] for s in range(4)) for t in range(4)) for row in sub.basis()]
        return QuatLattice.from_generators(alg, gens)

    O = congruence_lattice(B1)
    Ot = congruence_lattice(B2)
    omega = (Fraction(p, 2), half, Fraction(0), Fraction(0))
    kdata = KData(D, q, D0, omega)
    try:
        ok = O.is_order() and Ot.is_order()
    except Exception as exc:  # pragma: no cover - defensive
        raise ConstructionError(str(exc)) from exc
    if not ok:
        raise ConstructionError("K-aligned lattices are not orders")
    if O.disc != p or Ot.disc != p * p or not O.contains_lattice(Ot) or Ot.index_in(O) != p:
        raise ConstructionError(f"K-aligned orders fail validation (disc {O.disc}, {Ot.disc})")
    if not Ot.contains((1, 0, 0, 0)) or not Ot.contains((half, half, 0, 0)) or not Ot.contains(omega):
        raise ConstructionError("O_K is not contained in O_tilde")
    return alg, O, Ot, kdata


def _inv2(M):
    a, b = M[0]
    c, d = M[1]
    det = a * d - b * c
    return [[d / det, -b / det], [-c / det, a / det]]


def build_context_from_K(D: int, p: int, q: int | None = None) -> LevelP2Context:
    if q is None:
        q = choose_q(D, p)
    alg, O, Ot, kdata = build_orders_from_K(D, p, q)
    if ramified_places(alg.a, alg.b) != (INF, p):
        raise ConstructionError("K-aligned algebra ramifies at the wrong places")
    if sub_order_tilde(O, p) != Ot:
        raise ConstructionError("explicit O_tilde differs from the index-p suborder of O")
    P = bilateral_norm_p_of_max(O, p)
    ctx = LevelP2Context(p, alg, O, Ot, P, kdata)
    ctx.validate()
    return ctx
