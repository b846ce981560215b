"""Imaginary quadratic fields: ideals, reduced forms, class groups, genera and counting functions.

Ideals of K = Q(sqrt D) are rank-2 lattices in coordinates ``(x, y)`` for
``x + y sqrt(D)``.  An ideal with oriented basis ``w1, w2`` corresponds to
the form ``N(x w1 - y w2) / N(I)``; in particular ``[a, (-b + sqrt D)/2]``
gives ``(a, b, c)``.  Classes are stored as reduced forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd, isqrt

import numpy as np

from .arith import divisors, factor, is_fundamental_discriminant, kronecker, prime_divisors, sqrt_mod_prime
from .errors import FormError, InputError, InternalError
from .ratlinalg import HNFBasis, hnf, value_histogram

Form = tuple[int, int, int]


# ---------------------------------------------------------------------------
# K-lattices


def _k_mul(D: int, u, v):
    return (u[0] * v[0] + D * u[1] * v[1], u[0] * v[1] + u[1] * v[0])


def k_lattice(gens) -> HNFBasis:
    return hnf([tuple(Fraction(c) for c in g) for g in gens], 2)


def k_product(D: int, A: HNFBasis, B: HNFBasis) -> HNFBasis:
    return k_lattice([_k_mul(D, u, v) for u in A.basis() for v in B.basis()])


def k_conj(A: HNFBasis) -> HNFBasis:
    return k_lattice([(u[0], -u[1]) for u in A.basis()])


def k_scale(A: HNFBasis, c) -> HNFBasis:
    return A.scale(Fraction(c))


def k_maximal_order(D: int) -> HNFBasis:
    half = Fraction(1, 2)
    return k_lattice([(1, 0), (half, half)] if D % 4 == 1 else [(1, 0), (0, 1)])


def k_norm_elt(D: int, u) -> Fraction:
    return Fraction(u[0]) ** 2 - D * Fraction(u[1]) ** 2


def k_ideal_norm(D: int, A: HNFBasis) -> Fraction:
    """Norm of a fractional ideal as its covolume relative to O_K."""
    return A.det() / k_maximal_order(D).det()


def k_prime_ideal(D: int, ell: int) -> HNFBasis:
    """An ideal of norm ell over an odd prime ell that splits or ramifies in K."""
    if ell == 2:
        raise InputError("only odd primes are supported")
    if D % ell == 0:
        b = ell
    else:
        if kronecker(D, ell) != 1:
            raise InputError(f"{ell} is inert in Q(sqrt {D})")
        r = sqrt_mod_prime(D % ell, ell)
        b = r
    if (b - D) % 2:
        b += ell
    return k_lattice([(ell, 0), (Fraction(b, 2), Fraction(1, 2))])


def k_prime_ideals_over(D: int, ell: int) -> list[HNFBasis]:
    """All prime ideals above ell (odd or 2)."""
    e = kronecker(D, ell)
    OK = k_maximal_order(D)
    if e == -1:
        return [OK.scale(ell)]
    if ell == 2:
        # D = 1 mod 8: 2 splits; use the form route
        r = next(b for b in range(1, 8, 2) if (b * b - D) % 8 == 0)
        P = k_lattice([(2, 0), (Fraction(r, 2), Fraction(1, 2))])
    else:
        P = k_prime_ideal(D, ell)
    if e == 0:
        return [P]
    return [P, k_conj(P)]


def form_of_ideal(D: int, A: HNFBasis) -> Form:
    """The (not yet reduced) form N(x w1 - y w2)/N(A) for a positively oriented basis."""
    w1, w2 = A.basis()
    if w1[0] * w2[1] - w1[1] * w2[0] < 0:
        w1, w2 = w2, w1
    N = k_ideal_norm(D, A)
    a = k_norm_elt(D, w1) / N
    c = k_norm_elt(D, w2) / N
    # N(x w1 - y w2) = x^2 N(w1) - x y Tr(w1 conj(w2)) + y^2 N(w2)
    tr = 2 * (Fraction(w1[0]) * w2[0] - D * Fraction(w1[1]) * w2[1])
    b = -tr / N
    if any(t.denominator != 1 for t in (a, b, c)):
        raise FormError("ideal form is not integral")
    f = (int(a), int(b), int(c))
    if f[1] ** 2 - 4 * f[0] * f[2] != D:
        raise FormError("ideal form has the wrong discriminant")
    return f


def ideal_of_form(f: Form) -> HNFBasis:
    a, b, _c = f
    return k_lattice([(a, 0), (Fraction(-b, 2), Fraction(1, 2))])


# ---------------------------------------------------------------------------
# forms


def is_reduced(f: Form) -> bool:
    a, b, c = f
    if not (abs(b) <= a <= c):
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def reduce_form(f: Form) -> Form:
    """Reduced representative of a positive definite form (Gauss reduction)."""
    a, b, c = f
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise FormError("form is not positive definite")
    while True:
        # normalize: -a < b <= a
        if not (-a < b <= a):
            r = (a - b) // (2 * a)
            b, c = b + 2 * r * a, a * r * r + b * r + c
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            continue
        break
    return (a, b, c)


def reduced_forms(D: int) -> list[Form]:
    """All reduced primitive forms of discriminant D < 0, sorted."""
    out = []
    amax = isqrt(-D // 3) + 1
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a:
                continue
            f = (a, b, c)
            if gcd(gcd(a, b), c) != 1 or not is_reduced(f):
                continue
            out.append(f)
    return sorted(out)


def _solve_linmod(a: int, b: int, m: int) -> tuple[int, int]:
    """Solutions of a x = b (mod m) as x = u + v n."""
    g = gcd(a, m)
    if b % g:
        raise FormError("linear congruence has no solution")
    a, b, mm = a // g, b // g, m // g
    u = (b * pow(a, -1, mm)) % mm if mm > 1 else 0
    return u, mm


def compose_forms(f1: Form, f2: Form) -> Form:
    """Gaussian composition (Shanks' formulation), reduced."""
    a, b, c = f1
    al, be, ga = f2
    g = (b + be) // 2
    h = -(b - be) // 2
    w = gcd(gcd(a, al), g)
    j = w
    s = a // w
    t = al // w
    u = g // w
    mu, nu = _solve_linmod(t * u, h * u + s * c, s * t)
    lam, _ = _solve_linmod(t * nu, h - t * mu, s)
    k = mu + nu * lam
    l = (k * t - h) // s
    m = (t * u * k - h * u - c * s) // (s * t)
    return reduce_form((s * t, j * u - (k * t + l * s), k * l - j * m))


def principal_form(D: int) -> Form:
    k = D % 2
    return reduce_form((1, k, (k * k - D) // 4))


def inverse_form(f: Form) -> Form:
    a, b, c = f
    return reduce_form((a, -b, c))


def form_value(f: Form, x: int, y: int) -> int:
    a, b, c = f
    return a * x * x + b * x * y + c * y * y


@lru_cache(maxsize=4096)
def _rep_hist(f: Form, nmax: int) -> np.ndarray:
    a, b, c = f
    return value_histogram([[2 * a, b], [b, 2 * c]], 2 * nmax)[::2]


def rep_count(f: Form, m: int) -> int:
    """#{(x, y) in Z^2 : f(x, y) = m}."""
    if m < 0:
        return 0
    size = 64
    while size < m:
        size *= 2
    return int(_rep_hist(f, size)[m])


@lru_cache(maxsize=1024)
def values_mod(f: Form, modulus: int) -> frozenset[int]:
    """Residues mod |modulus| taken by f on Z^2."""
    M = abs(modulus)
    return frozenset(form_value(f, x, y) % M for x in range(M) for y in range(M))


def represents_mod(f: Form, target: int, modulus: int) -> bool:
    """Does f take a value = target (mod modulus) at some integer point?"""
    M = abs(modulus)
    if M == 1:
        return True
    return target % M in values_mod(f, M)


# ---------------------------------------------------------------------------
# the field


def units_half(D: int) -> int:
    """u_D = #O_K^x / 2."""
    return {-3: 3, -4: 2}.get(D, 1)


def prime_discriminants(D: int) -> list[int]:
    """The prime discriminants l* whose product is the odd fundamental discriminant D."""
    if D % 2 == 0:
        raise InputError("even discriminants are not supported here")
    return [(ell if ell % 4 == 1 else -ell) for ell in prime_divisors(D)]


@dataclass
class FieldK:
    """K = Q(sqrt D) for an odd negative fundamental discriminant D, with a chosen p | D."""

    D: int
    p: int
    _classes: list[Form] = field(default_factory=list, repr=False)
    _genus_cache: dict = field(default_factory=dict, repr=False)
    _q_cache: dict = field(default_factory=dict, repr=False)
    _prime_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.D >= 0 or self.D % 2 == 0 or not is_fundamental_discriminant(self.D):
            raise InputError(f"D = {self.D} must be a negative odd fundamental discriminant")
        if self.D % self.p:
            raise InputError(f"p = {self.p} does not divide D = {self.D}")
        self._classes = reduced_forms(self.D)

    # ---- constants ----
    @property
    def p_star(self) -> int:
        return self.p if self.p % 4 == 1 else -self.p

    @property
    def D0(self) -> int:
        return self.D // self.p_star

    @property
    def h(self) -> int:
        return len(self._classes)

    @property
    def u(self) -> int:
        return units_half(self.D)

    @property
    def classes(self) -> list[Form]:
        return list(self._classes)

    def eps(self, n: int) -> int:
        return kronecker(self.D, n)

    # ---- class group ----
    def principal(self) -> Form:
        return principal_form(self.D)

    def mul(self, f: Form, g: Form) -> Form:
        return compose_forms(f, g)

    def mul_via_ideals(self, f: Form, g: Form) -> Form:
        return reduce_form(form_of_ideal(self.D, k_product(self.D, ideal_of_form(f), ideal_of_form(g))))

    def class_of_ideal(self, A: HNFBasis) -> Form:
        return reduce_form(form_of_ideal(self.D, A))

    def class_index(self, f: Form) -> int:
        return self._classes.index(reduce_form(f))

    @cached_property
    def table(self) -> list[list[int]]:
        cl = self._classes
        return [[cl.index(self.mul(f, g)) for g in cl] for f in cl]

    def ideal_reps(self) -> list[HNFBasis]:
        """One integral ideal in each class, in class order."""
        return [ideal_of_form(f) for f in self._classes]

    # ---- genus theory ----
    def genus_character(self, D1: int, f: Form) -> int:
        """chi_{D1, D/D1}(class of f) for a fundamental factor D1 of D."""
        key = (D1, f)
        if key not in self._genus_cache:
            self._genus_cache[key] = self._genus_character(D1, f)
        return self._genus_cache[key]

    def _genus_character(self, D1: int, f: Form) -> int:
        D2 = self.D // D1
        if D1 == 1 or D2 == 1:
            return 1
        a, b, c = f
        for x in range(0, 30):
            for y in range(0, 30):
                n = form_value(f, x, y)
                if n <= 0:
                    continue
                if gcd(n, D1) == 1:
                    return kronecker(D1, n)
                if gcd(n, D2) == 1:
                    return kronecker(D2, n)
        raise FormError("no value prime to D1 or D2 found")

    def genus(self, f: Form) -> tuple[int, ...]:
        """Values of chi_{l*, D/l*} over the prime discriminants l* of D."""
        return tuple(self.genus_character(ls, f) for ls in prime_discriminants(self.D))

    def genera(self) -> list[tuple[int, ...]]:
        seen = []
        for f in self._classes:
            g = self.genus(f)
            if g not in seen:
                seen.append(g)
        return seen

    def principal_genus(self) -> tuple[int, ...]:
        return self.genus(self.principal())

    def squares(self) -> set[Form]:
        return {self.mul(f, f) for f in self._classes}

    # ---- counting ----
    def r_A(self, f: Form, m: int) -> Fraction:
        """1/2 the number of representations of m by f; r(0) = 1/(2 u)."""
        if m == 0:
            return Fraction(1, 2 * self.u)
        return Fraction(rep_count(reduce_form(f), m), 2)

    def R_D(self, n: int) -> int:
        return sum(self.eps(d) for d in divisors(n))

    def ideals_of_norm(self, n: int) -> list[HNFBasis]:
        """All integral ideals of norm n, built from prime factorizations."""
        OK = k_maximal_order(self.D)
        current = [OK]
        for ell, e in factor(n):
            primes = k_prime_ideals_over(self.D, ell)
            kind = kronecker(self.D, ell)
            if kind == -1:
                if e % 2:
                    return []
                local = [OK.scale(ell ** (e // 2))]
            elif kind == 0:
                local = [_k_power(self.D, primes[0], e)]
            else:
                P, Pb = primes
                local = [k_product(self.D, _k_power(self.D, P, i), _k_power(self.D, Pb, e - i)) for i in range(e + 1)]
            current = [k_product(self.D, A, L) for A in current for L in local]
        return current

    def R_genus(self, gen: tuple[int, ...], n: int, method: str = "forms") -> int:
        """Integral ideals of norm n in a genus.

        ``method="lattice"`` builds every ideal as a lattice and reduces its
        form; ``method="forms"`` composes the classes of the prime factors.
        """
        if method == "lattice":
            classes = [self.class_of_ideal(A) for A in self.ideals_of_norm(n)]
        else:
            classes = self.ideal_classes_of_norm(n)
        return sum(1 for f in classes if self.genus(f) == gen)

    def prime_classes(self, ell: int) -> list[Form]:
        """Classes of the prime ideals above ell."""
        if ell not in self._prime_cache:
            self._prime_cache[ell] = [self.class_of_ideal(P) for P in k_prime_ideals_over(self.D, ell)]
        return self._prime_cache[ell]

    def ideal_classes_of_norm(self, n: int) -> list[Form]:
        """Classes (with multiplicity) of the integral ideals of norm n."""
        one = self.principal()
        current = [one]
        for ell, e in factor(n):
            kind = kronecker(self.D, ell)
            if kind == -1:
                if e % 2:
                    return []
                local = [one]
            else:
                pc = self.prime_classes(ell)
                if kind == 0:
                    local = [_form_power(pc[0], e, one)]
                else:
                    local = [self.mul(_form_power(pc[0], i, one), _form_power(pc[1], e - i, one)) for i in range(e + 1)]
            current = [self.mul(a, b) for a in current for b in local]
        return current

    def genus_of_product(self, f: Form, g: Form) -> tuple[int, ...]:
        return self.genus(self.mul(f, g))

    def q_set(self, N: int, bound: int = 2000) -> list[tuple[int, ...]]:
        """Genera containing an integral ideal whose norm is -N mod D0."""
        key = (N, bound)
        if key not in self._q_cache:
            self._q_cache[key] = self._q_set(N, bound)
        return list(self._q_cache[key])

    def _q_set(self, N: int, bound: int) -> list[tuple[int, ...]]:
        M = abs(self.D0)
        out = []
        for f in self._classes:
            g = self.genus(f)
            if g in out:
                continue
            hist = _rep_hist(f, bound)
            if any(hist[v] and (v + N) % M == 0 for v in range(1, bound + 1)):
                out.append(g)
        return out

    def class_of_q(self, q: int) -> Form:
        return self.class_of_ideal(k_prime_ideal(self.D, q))


def _form_power(f: Form, e: int, one: Form) -> Form:
    out = one
    for _ in range(e):
        out = compose_forms(out, f)
    return out


def _k_power(D: int, P: HNFBasis, e: int) -> HNFBasis:
    out = k_maximal_order(D)
    for _ in range(e):
        out = k_product(D, out, P)
    return out


def delta(n: int, D0: int) -> int:
    return 2 ** len(prime_divisors(gcd(n, abs(D0))))


def _prime_disc_split(D0: int, d: int) -> tuple[int, int]:
    """(D1, D2) with D0 = D1 D2 and |D2| = gcd(D0, d)."""
    D2 = 1
    for ls in prime_discriminants(D0) if abs(D0) > 1 else []:
        if d % abs(ls) == 0:
            D2 *= ls
    return D0 // D2, D2


def eps_tilde(K: FieldK, f: Form, n: int, d: int, N: int) -> int:
    """eps_{D1}(-N d) eps_{p* D2}(n/d) chi_{D1, p* D2}(class), |D2| = gcd(D0, d)."""
    if d <= 0 or n % d:
        raise InputError(f"{d} does not divide {n}")
    D1, D2 = _prime_disc_split(K.D0, d)
    return kronecker(D1, -N * d) * kronecker(K.p_star * D2, n // d) * K.genus_character(D1, f)


def sigma_A(K: FieldK, f: Form, n: int, N: int) -> Fraction:
    """The divisor-sum form; n = 0 gives (1 - eps_D(N eta))/2 * h/u."""
    if n == 0:
        eta = gcd(N, K.D)
        return Fraction(1 - K.eps(N * eta), 2) * Fraction(K.h, K.u)
    return Fraction(sum(eps_tilde(K, f, n, d, N) for d in divisors(n)))


def sigma_A_split(K: FieldK, f: Form, n0: int, n1: int, N: int) -> int:
    """sigma_A(n0, n1) = sum over d0 | n0 of eps_tilde(n0 n1, d0)."""
    return sum(eps_tilde(K, f, n0 * n1, d0, N) for d0 in divisors(n0))


def d_part(n: int, D: int) -> int:
    """gcd(n, D^infinity)."""
    out = 1
    for ell, e in factor(n):
        if D % ell == 0:
            out *= ell**e
    return out


def sigma_A_closed(K: FieldK, f: Form, n: int, N: int) -> int:
    """delta(n) * sum over Q of R_{genus(A q)}(n)."""
    Q = K.q_set(N)
    gA = K.genus(f)
    total = 0
    for gq in Q:
        target = tuple(x * y for x, y in zip(gA, gq))
        total += K.R_genus(target, n)
    return delta(n, K.D0) * total


def sigma_hypothesis(K: FieldK, f: Form, n: int, N: int) -> bool:
    """Is there an ideal in the class with norm = -nN mod D?"""
    return represents_mod(f, -n * N, K.D)


def choose_omega(D: int, p: int) -> tuple[Fraction, Fraction]:
    """(p + sqrt D)/2 as (x, y) for x + y sqrt D: trace p, discriminant D."""
    if D % 2 == 0:
        raise InputError("D must be odd")
    return (Fraction(p, 2), Fraction(1, 2))


def class_group_json(K: FieldK) -> dict:
    return {
        "D": K.D,
        "p": K.p,
        "D0": K.D0,
        "h": K.h,
        "u": K.u,
        "classes": [list(f) for f in K.classes],
        "genera": [list(g) for g in K.genera()],
        "genus_of_class": [list(K.genus(f)) for f in K.classes],
        "table": K.table,
    }


def unitary_divisors(n: int) -> list[int]:
    """Divisors d of n with gcd(d, n/d) = 1."""
    out = [1]
    for ell, e in factor(n):
        out = out + [d * ell**e for d in out]
    return sorted(out)


def eps_ratio(K: FieldK, f: Form, n: int, dprime: int, N: int) -> Fraction:
    """eps_tilde(n, eta~ d') / eps_tilde(n, eta~) with eta~ = gcd(n, p^infinity)."""
    et = d_part(n, K.p)
    base = eps_tilde(K, f, n, et, N)
    if base == 0:
        raise InternalError("eps_tilde(n, eta~) vanished")
    return Fraction(eps_tilde(K, f, n, et * dprime, N), base)


def ratio_conditions(K: FieldK, f: Form, n: int, N: int) -> list[tuple[bool, bool, bool]]:
    """For each ideal b of norm n: (all ratios are 1, character condition, genus search).

    The first entry is independent of b; the three should agree whenever the
    class contains an ideal of norm = -nN (mod D).
    """
    nprime = d_part(n, K.D0) if abs(K.D0) > 1 else 1
    cond_i = all(eps_ratio(K, f, n, d, N) == 1 for d in unitary_divisors(nprime))
    Q = K.q_set(N)
    lstars = prime_discriminants(K.D0) if abs(K.D0) > 1 else []
    out = []
    for g in K.ideal_classes_of_norm(n):
        ab = K.mul(f, g)
        cond_ii = all(K.genus_character(ls, ab) == kronecker(ls, -N) for ls in lstars)
        cond_iii = K.genus(ab) in Q
        out.append((cond_i, cond_ii, cond_iii))
    return out
