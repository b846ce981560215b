"""Numerical central values of weight-2 L-series and the Waldspurger ratio test.

Coefficients come from Brandt-module eigenvalues: a(l) is read off one
coordinate of t_l e for primes l != p, extended by multiplicativity and the
Hecke recursion, and a(p^k) = 0.  Central values use the smoothed
approximate functional equation

    L(1) = S(t) + eps S(1/t),   S(t) = sum a(n)/n exp(-2 pi n t / sqrt(M)),

which holds for every t > 0 exactly when (M, eps) are the level and sign.
Evaluating at several t therefore certifies both the value and the pair
(M, eps); for twists the pair is found by searching candidate levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .arith import divisors, factor, kronecker, primes_up_to
from .errors import BootstrapError, Indeterminate, InputError
from .hecke_ops import HeckeData
from .ideals import ClassList, hom_histogram
from .spectra import EigenVector

T_VALUES = (1.0, 1.1, 1.3)
SPREAD_TOL = 1e-6
ZERO_TOL = 1e-6
RATIO_TOL = 1e-4
# exp(-TAIL) is the relative size of the first omitted term
TAIL = 36.0
WORK_DPS = 50


@dataclass
class CoeffStream:
    """a(n) for 0 <= n <= nmax as floats (a(0) = 0); exact prime values kept when rational."""

    a: np.ndarray
    p: int
    embedding: int = 0
    exact: dict = field(default_factory=dict)
    twist: int | None = None

    @property
    def nmax(self) -> int:
        return len(self.a) - 1

    def __getitem__(self, n: int) -> float:
        return float(self.a[n])


def needed_terms(M: int, t_values=T_VALUES) -> int:
    """Number of terms making the smoothed sums accurate to about exp(-TAIL)."""
    tmin = min(min(t_values), 1 / max(t_values))
    return int(math.ceil(TAIL * math.sqrt(M) / (2 * math.pi * tmin))) + 1


# ---------------------------------------------------------------------------
# coefficients


def _anchor(ev: EigenVector, k: int) -> int:
    e = ev.coords_float(k)
    return int(np.argmax(np.abs(e)))


def prime_eigenvalues(ev: EigenVector, cl: ClassList, nmax: int, p: int, k: int = 0) -> tuple[dict, dict]:
    """a(l) for primes l <= nmax, l != p: (floats, exact Fractions when the field is Q).

    With B_ij(m) = hom(a_j, a_i, m)/w_j and operators acting by B^T, the
    eigenvalue of t_m is (sum_i hom(a_k, a_i, m) e_i) / (w_k e_k) for any
    coordinate k with e_k != 0.
    """
    kk = _anchor(ev, k)
    hists = [hom_histogram(cl.reps[kk], cl.reps[i], nmax).astype(np.float64) / 2 for i in range(cl.h)]
    wk = cl.weights[kk]
    primes = [ell for ell in primes_up_to(nmax) if ell != p]
    floats = {}
    exact = {}
    if ev.is_rational():
        e = [c.to_fraction() for c in ev.coords]
        ints = [hom_histogram(cl.reps[kk], cl.reps[i], nmax) for i in range(cl.h)]
        for ell in primes:
            val = sum((Fraction(int(ints[i][ell]), 2) * e[i] for i in range(cl.h)), Fraction(0)) / (wk * e[kk])
            exact[ell] = val
            floats[ell] = float(val)
    else:
        e = ev.coords_float(k)
        for ell in primes:
            floats[ell] = float(sum(hists[i][ell] * e[i] for i in range(cl.h)) / (float(wk) * e[kk]))
    return floats, exact


def check_against_eigen_map(ev: EigenVector, floats: dict, k: int = 0, tol: float = 1e-8) -> bool:
    """The histogram eigenvalues agree with the exact eigen_map where both exist."""
    root = ev.embeddings()[k]
    for ell, lam in ev.eigen_map.items():
        if ell in floats and abs(lam.embed(root) - floats[ell]) > tol:
            return False
    return True


def coeffs_from_primes(prime_vals: dict, p: int, nmax: int) -> np.ndarray:
    """Multiplicative extension with a(l^(k+1)) = a(l) a(l^k) - l a(l^(k-1)) and a(p^k) = 0."""
    a = np.zeros(nmax + 1)
    if nmax >= 1:
        a[1] = 1.0
    # prime powers
    pp = {}
    for ell in primes_up_to(nmax):
        lam = 0.0 if ell == p else prime_vals[ell]
        q = ell
        prev2, prev1 = 1.0, lam
        while q <= nmax:
            pp[q] = 0.0 if ell == p else prev1
            prev2, prev1 = prev1, lam * prev1 - ell * prev2
            q *= ell
    # smallest prime factor sieve
    spf = np.zeros(nmax + 1, dtype=np.int64)
    for ell in primes_up_to(nmax):
        block = spf[ell::ell]
        block[block == 0] = ell
    for n in range(2, nmax + 1):
        ell = int(spf[n])
        q = ell
        while n % (q * ell) == 0:
            q *= ell
        rest = n // q
        a[n] = pp[q] * a[rest] if rest > 1 else pp[q]
    return a


def hecke_coeffs(ev: EigenVector, cl: ClassList, nmax: int, p: int, k: int = 0) -> CoeffStream:
    """Coefficient stream of the newform attached to ev (embedding k of its field)."""
    if ev.classification != "new":
        raise InputError(f"coefficient streams need a vector classified new, got {ev.classification}")
    floats, exact = prime_eigenvalues(ev, cl, nmax, p, k)
    if not check_against_eigen_map(ev, floats, k):
        raise InputError("histogram eigenvalues disagree with the eigen map")
    return CoeffStream(coeffs_from_primes(floats, p, nmax), p, k, exact)


def coeffs_from_phi(ev: EigenVector, hecke: HeckeData, nmax: int, k: int = 0) -> np.ndarray:
    """a(n) = <e, t_n e>/<e, e>, read from the pairwise hom series (second route)."""
    e = ev.coords_float(k)
    cl = hecke.cl
    w = np.array([float(x) for x in cl.weights])
    a = np.zeros(nmax + 1)
    norm = float(np.sum(e * e * w))
    for n in range(1, nmax + 1):
        total = 0.0
        for kk in range(cl.h):
            # (t_n e)_kk = sum_i hom(a_kk, a_i, n) e_i / w_kk; pairing multiplies by w_kk
            s = sum(float(hecke.hom(kk, i, n)) * e[i] for i in range(cl.h))
            total += e[kk] * s
        a[n] = total / norm
    return a


def twist_stream(stream: CoeffStream, D: int) -> CoeffStream:
    chi = np.array([0] + [kronecker(D, n) for n in range(1, stream.nmax + 1)], dtype=np.float64)
    return CoeffStream(stream.a * chi, stream.p, stream.embedding, {}, D)


# ---------------------------------------------------------------------------
# central values


def smoothed_sum(a: np.ndarray, M: int, t: float) -> float:
    n = np.arange(1, len(a))
    return float(np.sum(a[1:] / n * np.exp(-2 * np.pi * n * t / math.sqrt(M))))


def smoothed_sum_mp(a: np.ndarray, M: int, t: float, dps: int = WORK_DPS) -> mpmath.mpf:
    with mpmath.workdps(dps):
        c = -2 * mpmath.pi * mpmath.mpf(t) / mpmath.sqrt(M)
        nmax = min(len(a) - 1, needed_terms(M, (t, 1 / t)))
        return mpmath.fsum(mpmath.mpf(float(a[n])) / n * mpmath.exp(c * n) for n in range(1, nmax + 1) if a[n])


def afe_values(a: np.ndarray, M: int, eps: int, t_values=T_VALUES) -> list[float]:
    return [smoothed_sum(a, M, t) + eps * smoothed_sum(a, M, 1 / t) for t in t_values]


@dataclass
class CentralValue:
    value: float
    level: int
    sign: int
    spread: float
    values: list[float]
    candidates: list[dict] = field(default_factory=list)
    twist: int | None = None

    @property
    def error_bound(self) -> float:
        return self.spread

    def is_zero(self, tol: float = ZERO_TOL) -> bool:
        return abs(self.value) <= tol

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "level": self.level,
            "sign": self.sign,
            "spread": self.spread,
            "values": self.values,
            "twist": self.twist,
            "candidates": self.candidates,
        }


def twist_levels(p: int, D: int) -> list[int]:
    """Divisors M of p^2 D^2 with lcm(p^2, |D|) | M."""
    base = math.lcm(p * p, abs(D))
    top = p * p * D * D
    return sorted(M for M in divisors(top) if M % base == 0)


def _evaluate(stream: CoeffStream, M: int, eps: int, t_values) -> tuple[float, list[float]]:
    vals = afe_values(stream.a, M, eps, t_values)
    return max(vals) - min(vals), vals


def central_value(
    stream: CoeffStream,
    levels: list[int] | None = None,
    signs=(1, -1),
    tol: float = SPREAD_TOL,
    t_values=T_VALUES,
) -> CentralValue:
    """L(1) with the (level, sign) pair certified by the cross-t spread.

    Exactly one candidate must fall below ``tol``; the value is then
    recomputed at working precision.
    """
    if levels is None:
        levels = [stream.p**2] if stream.twist is None else twist_levels(stream.p, stream.twist)
    cands = []
    for M in levels:
        if needed_terms(M, t_values) > stream.nmax + 1:
            cands.append({"level": M, "sign": None, "spread": None, "skipped": "too few coefficients"})
            continue
        for eps in signs:
            spread, vals = _evaluate(stream, M, eps, t_values)
            cands.append({"level": M, "sign": eps, "spread": spread})
    good = [c for c in cands if c["spread"] is not None and c["spread"] <= tol]
    if len(good) != 1:
        raise BootstrapError(f"{len(good)} (level, sign) candidates pass the spread test")
    M, eps = good[0]["level"], good[0]["sign"]
    vals = [
        float(smoothed_sum_mp(stream.a, M, t) + eps * smoothed_sum_mp(stream.a, M, 1 / t)) for t in t_values
    ]
    spread = max(vals) - min(vals)
    return CentralValue(float(mpmath.fsum(vals) / len(vals)), M, eps, spread, vals, cands, stream.twist)


def central_value_at(stream: CoeffStream, M: int, eps: int, t_values=T_VALUES) -> CentralValue:
    """Evaluate with a prescribed (level, sign) and record the spread."""
    spread, vals = _evaluate(stream, M, eps, t_values)
    return CentralValue(float(np.mean(vals)), M, eps, spread, vals, [], stream.twist)


def untwisted_sign_from_w_tilde(w_tilde_sign: int) -> int:
    """The functional-equation sign of L(f, s) in terms of the W~-eigenvalue of e_f.

    With the permutation convention used for W_g the two signs coincide;
    this is confirmed by the level-p^2 bootstrap for every newform at
    p = 7, 11 and 13.
    """
    return w_tilde_sign


def central_value_untwisted(stream: CoeffStream, w_tilde_sign: int) -> CentralValue:
    """L(f, 1) at level p^2; a sign of -1 gives the value 0 exactly."""
    eps = untwisted_sign_from_w_tilde(w_tilde_sign)
    if eps == -1:
        spread, vals = _evaluate(stream, stream.p**2, -1, T_VALUES)
        return CentralValue(0.0, stream.p**2, -1, spread, vals)
    return central_value(stream, [stream.p**2], signs=(eps,))


# ---------------------------------------------------------------------------
# ratios


def waldspurger_ratio(p: int, d1: int, d2: int, c1, c2, L1: float, L2: float, zero_tol: float = ZERO_TOL) -> float:
    """Relative defect of c1^2 L2 sqrt(p d2) against c2^2 L1 sqrt(p d1)."""
    if d1 == d2:
        return 0.0
    if abs(L1) <= zero_tol and abs(L2) <= zero_tol:
        raise Indeterminate("both L-values vanish")
    x = float(c1) ** 2 * L2 * math.sqrt(p * d2)
    y = float(c2) ** 2 * L1 * math.sqrt(p * d1)
    den = max(abs(x), abs(y))
    if den == 0:
        raise Indeterminate("both sides vanish")
    return abs(x - y) / den


def main_theorem_constant(p: int, d: int, c, L: float) -> float:
    """L(f, -p d, 1) sqrt(p d) / c_d^2, independent of d when the identity holds."""
    return L * math.sqrt(p * d) / float(c) ** 2


def square_free_part(n: int) -> int:
    out = 1
    for q, e in factor(n):
        if e % 2:
            out *= q
    return out
