"""Executable forms of the exact identities relating heights, theta series and class groups.

Every check returns an :class:`IdentityReport`.  All comparisons are exact
(rationals or number-field elements) unless stated otherwise.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .arith import is_fundamental_discriminant, legendre
from .errors import AbsentError, InputError
from .hecke_ops import BilateralGroup, W_apply, bilateral_group
from .ideals import ClassList, LeftIdeal, enumerate_classes, hom_histogram
from .lseries import (
    RATIO_TOL,
    ZERO_TOL,
    central_value,
    central_value_untwisted,
    hecke_coeffs,
    needed_terms,
    twist_stream,
    waldspurger_ratio,
)
from .numfield import NFElem, nf_nullspace, nf_solve_in_span
from .orders_p2 import LevelP2Context, build_context, build_context_from_K
from .quadfield import FieldK, delta, ideal_of_form, k_product
from .spectra import Component, EigenVector, Spectrum, select_e_f, spectrum
from .specialpoints import c1_vector, c_d_vector, ideal_from_K, matching_cells, p0_index
from .theta import QExpansion, ThetaTable


@dataclass
class IdentityReport:
    name: str
    params: dict
    lhs: object
    rhs: object
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "identity": self.name,
            "params": self.params,
            "lhs": _ser(self.lhs),
            "rhs": _ser(self.rhs),
            "verdict": "pass" if self.passed else "fail",
            "detail": _ser(self.detail),
        }


def _ser(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if x is None or isinstance(x, (bool, int, str, float)):
        return x
    if isinstance(x, NFElem):
        return [_ser(c) for c in x.coeffs()]
    if isinstance(x, QExpansion):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _ser(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_ser(v) for v in x]
    return str(x)


# ---------------------------------------------------------------------------
# the K-aligned setting


class KSetting:
    """Everything needed for the identities at one discriminant D = -p d."""

    def __init__(self, D: int, p: int, q: int | None = None):
        if D % p or D >= 0 or D % 2 == 0:
            raise InputError("D must be odd, negative and divisible by p")
        self.D, self.p = D, p
        self.K = FieldK(D, p)
        self.ctx: LevelP2Context = build_context_from_K(D, p, q)
        self.u = self.K.u

    @property
    def d(self) -> int:
        return -self.D // self.p

    @cached_property
    def classes(self) -> ClassList:
        return enumerate_classes(self.ctx.O_tilde, self.p, seeds=self.ctx.norm_one)

    @cached_property
    def group(self) -> BilateralGroup:
        return bilateral_group(self.ctx)

    @cached_property
    def p0(self) -> int:
        return p0_index(self.ctx, self.group)

    @cached_property
    def spectrum(self) -> Spectrum:
        return spectrum(self.ctx, self.classes, self.group, self.p0)

    @cached_property
    def c1(self) -> list[int]:
        return c1_vector(self.ctx, self.classes, self.K)

    def quat_ideal(self, A) -> LeftIdeal:
        return LeftIdeal(ideal_from_K(self.ctx, A), self.ctx.O_tilde)

    @cached_property
    def q_genus(self) -> tuple[int, ...]:
        Q = self.K.q_set(self.p * self.p)
        if len(Q) != 1:
            raise InputError(f"expected one genus in Q, found {len(Q)}")
        return Q[0]


# ---------------------------------------------------------------------------
# formula B and formula A


def _r(K: FieldK, f, m: int) -> Fraction:
    return K.r_A(f, m)


def class_group_side(K: FieldK, f, m: int, q_genera) -> Fraction:
    """u h r_a(m) + 2 u^2 sum_n delta(n) r_a(m|D| - p^2 n) R_<a q>(n)."""
    u, h, p, D = K.u, K.h, K.p, K.D
    total = u * h * _r(K, f, m)
    gA = K.genus(f)
    for n in range(1, abs(D) * m // (p * p) + 1):
        r = _r(K, f, m * abs(D) - p * p * n)
        if r == 0:
            continue
        for gq in q_genera:
            target = tuple(x * y for x, y in zip(gA, gq))
            total += 2 * u * u * delta(n, K.D0) * r * K.R_genus(target, n)
    return total


def heights_series(S: KSetting, A, mmax: int) -> list[Fraction]:
    """sum over b in I(O_K) of <O~ b, t_m O~ a b> for m = 0..mmax (via hom counts)."""
    out = [Fraction(0)] * (mmax + 1)
    for B in S.K.ideal_reps():
        Ib = S.quat_ideal(B)
        Iab = S.quat_ideal(k_product(S.D, A, B))
        hist = hom_histogram(Ib, Iab, mmax)
        for m in range(mmax + 1):
            out[m] += Fraction(int(hist[m]), 2)
    return out


def heights_side(S: KSetting, A, m: int) -> tuple[Fraction, Fraction]:
    """(LHS, RHS) of formula B for the ideal A and one m."""
    lhs = heights_series(S, A, m)[m]
    f = S.K.class_of_ideal(A)
    rhs = class_group_side(S.K, f, m, [S.q_genus])
    return lhs, rhs


def formula_B(S: KSetting, mmax: int = 30) -> IdentityReport:
    t0 = time.time()
    rows = []
    ok = True
    for f in S.K.classes:
        A = ideal_of_form(f)
        lhs = heights_series(S, A, mmax)
        for m in range(1, mmax + 1):
            rhs = class_group_side(S.K, f, m, [S.q_genus])
            good = lhs[m] == rhs
            ok &= good
            rows.append({"class": list(f), "m": m, "lhs": lhs[m], "rhs": rhs, "ok": good})
    return IdentityReport(
        "formulaB",
        {"p": S.p, "D": S.D, "m_max": mmax},
        [r["lhs"] for r in rows],
        [r["rhs"] for r in rows],
        ok,
        {"rows": rows},
        time.time() - t0,
    )


def b_A_via_formula(K: FieldK, f, m: int, N: int | None = None) -> Fraction:
    """b_A(m) from class-group data alone; r(0) = 1/(2u)."""
    N = K.p**2 if N is None else N
    eta = K.p
    first = Fraction(1 - K.eps(N * eta), 2) * Fraction(K.h, K.u) * _r(K, f, m)
    gA = K.genus(f)
    total = first
    for gq in K.q_set(N):
        target = tuple(x * y for x, y in zip(gA, gq))
        for n in range(1, abs(K.D) * m // N + 1):
            r = _r(K, f, m * abs(K.D) - n * N)
            if r:
                total += delta(n, K.D0) * r * K.R_genus(target, n)
    return total


def g_A_series(K: FieldK, f, prec: int) -> QExpansion:
    return QExpansion([b_A_via_formula(K, f, m) for m in range(prec)], Fraction(2), K.p**2)


def g_A_from_heights(S: KSetting, A, prec: int) -> QExpansion:
    """(1/(2u^2)) sum_b phi(O~ b, O~ a b)."""
    hs = heights_series(S, A, prec - 1)
    return QExpansion([c / (2 * S.u * S.u) for c in hs], Fraction(2), S.p**2)


def g_A_crosscheck(S: KSetting, prec: int = 50) -> IdentityReport:
    t0 = time.time()
    ok = True
    per = {}
    for f in S.K.classes:
        ga = g_A_series(S.K, f, prec)
        gb = g_A_from_heights(S, ideal_of_form(f), prec)
        good = ga.agrees(gb)
        ok &= good
        per[str(list(f))] = {"formula": ga.coeffs, "heights": gb.coeffs, "ok": good}
    return IdentityReport("gA", {"p": S.p, "D": S.D, "prec": prec}, None, None, ok, per, time.time() - t0)


# ---------------------------------------------------------------------------
# the core identity


def _pair(u, v, weights):
    total = 0
    for a, b, w in zip(u, v, weights):
        total = total + a * b * w
    return total


def project_norm2(comp: Component, v, weights) -> NFElem:
    """<v_f, v_f> for the orthogonal projection v_f of v onto the component."""
    K = comp.field
    B = comp.basis
    k = len(B)
    gram = [[_pair(B[i], B[j], weights) for j in range(k)] for i in range(k)]
    rhs = [_pair(B[i], v, weights) for i in range(k)]
    # solve gram c = rhs; then <v_f, v_f> = c . rhs
    cols = [[gram[i][j] for i in range(k)] for j in range(k)]
    c = nf_solve_in_span(K, cols, [K.elem(x) if not isinstance(x, NFElem) else x for x in rhs])
    if c is None:
        raise InputError("degenerate Gram matrix on a component")
    return sum((ci * ri for ci, ri in zip(c, rhs)), K.zero())


@dataclass
class CoreResult:
    component: int
    classification: str
    w_tilde_sign: int
    lhs: NFElem
    rhs: NFElem
    c_d: NFElem
    cell: int

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs

    @property
    def both_zero(self) -> bool:
        return self.lhs.is_zero() and self.rhs.is_zero()


def fixed_vector(S: KSetting, comp: Component, cell: int) -> list[NFElem]:
    """The vector of the component fixed by W for the two-sided ideal ``cell``."""
    K = comp.field
    cols = []
    for b in comp.basis:
        Wb = W_apply(S.group, cell, S.classes, list(b))
        cols.append([x - y for x, y in zip(Wb, b)])
    n = len(comp.basis[0])
    M = [[cols[j][i] for j in range(len(cols))] for i in range(n)]
    ker = nf_nullspace(K, M)
    if len(ker) != 1:
        raise AbsentError(f"W-fixed space of the component has dimension {len(ker)}")
    c = ker[0]
    return [sum((c[k] * comp.basis[k][i] for k in range(len(c))), K.zero()) for i in range(n)]


def core_identity_component(S: KSetting, comp: Component, cell: int) -> CoreResult:
    """<c_f, c_f>/u^2 versus <c_{d,P}, e_f>^2/<e_f, e_f> for one component and one cell P.

    e_f is the vector of the component fixed by W_P for the same P.
    """
    K = comp.field
    w = S.classes.weights
    ev = select_e_f(comp)
    e = fixed_vector(S, comp, cell)
    lhs = project_norm2(comp, S.c1, w) / (S.u * S.u)
    cd = c_d_vector(S.classes, S.group.elements[cell], S.D, S.p)
    c_d = K.elem(0) + _pair(cd, e, w)
    rhs = c_d * c_d / _pair(e, e, w)
    return CoreResult(comp.index, ev.classification, ev.w_tilde_sign, lhs, rhs, c_d, cell)


def core_identity(S: KSetting, cells: list[int] | None = None, only_new: bool = True) -> IdentityReport:
    """The identity for every component (new ones by default) and each matching cell."""
    t0 = time.time()
    if cells is None:
        cells = matching_cells(S.group, S.d)
    results = []
    for comp in S.spectrum.components:
        try:
            e = select_e_f(comp)
        except AbsentError:
            continue
        if only_new and e.classification != "new":
            continue
        for cell in cells:
            results.append(core_identity_component(S, comp, cell))
    ok = all(r.passed for r in results) and bool(results)
    detail = {
        "p0": S.p0,
        "cells": cells,
        "results": [
            {
                "component": r.component,
                "cell": r.cell,
                "classification": r.classification,
                "w_tilde_sign": r.w_tilde_sign,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "c_d": r.c_d,
                "both_zero": r.both_zero,
                "ok": r.passed,
            }
            for r in results
        ],
    }
    return IdentityReport("core", {"p": S.p, "D": S.D, "d": S.d}, None, None, ok, detail, time.time() - t0)


def c1_relation(S: KSetting) -> bool:
    """c_{d,p0} = 1/2 (c_1 + W~ c_1) exactly."""
    cd = c_d_vector(S.classes, S.group.elements[S.p0], S.D, S.p)
    Wc = W_apply(S.group, S.group.wtilde, S.classes, list(S.c1))
    return cd == [Fraction(a + b, 2) for a, b in zip(S.c1, Wc)]


def fundamental_ds(p: int, dmax: int, odd_only: bool = True) -> list[int]:
    """d <= dmax with -p d a fundamental discriminant (odd ones by default)."""
    out = []
    for d in range(1, dmax + 1):
        D = -p * d
        if not is_fundamental_discriminant(D):
            continue
        if odd_only and D % 2 == 0:
            continue
        out.append(d)
    return out


# ---------------------------------------------------------------------------
# the main theorem: exact coefficients against analytic central values


def main_ds(p: int, chi: int, dmax: int, include_even: bool = True) -> list[int]:
    """d <= dmax with -p d fundamental and (d|p) = chi."""
    return [d for d in fundamental_ds(p, dmax, odd_only=not include_even) if legendre(d, p) == chi]


@dataclass
class MainRow:
    p: int
    d: int
    c_d: object
    c_float: float
    L: float
    level: int
    sign: int
    spread: float
    embedding: int

    @property
    def c_scaled(self) -> float:
        """c_d^2 / sqrt(p d)."""
        return self.c_float**2 / math.sqrt(self.p * self.d)

    @property
    def coefficient_zero(self) -> bool:
        return _is_zero(self.c_d)

    @property
    def covanishes(self) -> bool:
        return self.coefficient_zero == (abs(self.L) <= ZERO_TOL)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "c_d": _ser(self.c_d),
            "c_d_float": self.c_float,
            "c_d^2/sqrt(pd)": self.c_scaled,
            "L": self.L,
            "level": self.level,
            "sign": self.sign,
            "spread": self.spread,
            "embedding": self.embedding,
            "covanishes": self.covanishes,
        }


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, NFElem) else x == 0


def _float_of(x, root) -> float:
    return x.embed(root) if isinstance(x, NFElem) else float(x)


def theta_coefficients(cl: ClassList, e: EigenVector, P, p: int, dmax: int) -> list:
    """Coefficients of Theta_P(e) up to q^dmax, exact over the field of e."""
    return ThetaTable(cl.reps, p, dmax + 1).vec(e.coords, P)


def odd_coefficient_check(cl: ClassList, e: EigenVector, P, p: int, d: int, coeff) -> bool:
    """For odd -p d the theta coefficient equals <c_{d,P}, e>."""
    cd = c_d_vector(cl, P, -p * d, p)
    return _pair(cd, e.coords, cl.weights) == coeff


def ratio_residuals(rows: list[MainRow]) -> list[dict]:
    live = [r for r in rows if not r.coefficient_zero and abs(r.L) > ZERO_TOL]
    out = []
    for a in range(len(live)):
        for b in range(a + 1, len(live)):
            r1, r2 = live[a], live[b]
            res = waldspurger_ratio(r1.p, r1.d, r2.d, r1.c_float, r2.c_float, r1.L, r2.L)
            out.append({"d1": r1.d, "d2": r2.d, "residual": res, "even": r1.d % 2 == 0 or r2.d % 2 == 0})
    return out


def main_theorem_report(
    p: int,
    dmax: int = 60,
    cell: int | None = None,
    ds: list[int] | None = None,
    exact_subidentities: bool = False,
    m_max: int = 10,
    prec: int = 20,
) -> IdentityReport:
    """c_d from Theta_P(e_f) against L(f, -p d, 1) for every new (non-twist) f.

    Checks, per f and real embedding: co-vanishing c_d = 0 iff |L| <= 1e-6,
    and pairwise relative residuals of the Main-Theorem ratio <= 1e-4,
    with even d entering only through the analytic side.  Odd d also get
    the exact check that the theta coefficient equals <c_{d,P}, e_f>.
    """
    t0 = time.time()
    ctx = build_context(p)
    cl = enumerate_classes(ctx.O_tilde, p, seeds=ctx.norm_one)
    G = bilateral_group(ctx)
    cell = G.norm_p[0] if cell is None else cell
    P = G.elements[cell]
    chi = G.chi[cell]
    if ds is None:
        ds = main_ds(p, chi, dmax)
    bad = [d for d in ds if legendre(d, p) != chi]
    if bad:
        raise InputError(f"d values {bad} do not match the character of the chosen ideal")
    dmax = max(ds)
    spec = spectrum(ctx, cl, G, cell)
    forms = []
    ok = True
    for comp in spec.new_components():
        e = select_e_f(comp)
        theta = theta_coefficients(cl, e, P, p, dmax)
        odd_ok = all(
            odd_coefficient_check(cl, e, P, p, d, theta[d]) for d in ds if (-p * d) % 4 == 1
        )
        nmax = needed_terms(p * p * (p * dmax) ** 2)
        for k in range(e.degree):
            root = e.embeddings()[k]
            stream = hecke_coeffs(e, cl, nmax, p, k)
            untw = central_value_untwisted(stream, e.w_tilde_sign)
            rows = []
            for d in ds:
                cv = central_value(twist_stream(stream, -p * d))
                rows.append(MainRow(p, d, theta[d], _float_of(theta[d], root), cv.value, cv.level, cv.sign, cv.spread, k))
            ratios = ratio_residuals(rows)
            cov = all(r.covanishes for r in rows)
            max_res = max((x["residual"] for x in ratios), default=0.0)
            even_used = any(x["even"] for x in ratios)
            good = odd_ok and cov and max_res <= RATIO_TOL
            ok &= good
            forms.append(
                {
                    "component": comp.index,
                    "embedding": k,
                    "w_tilde_sign": e.w_tilde_sign,
                    "eigenvalues": {ell: round(e.eigen_map[ell].embed(root), 10) for ell in sorted(e.eigen_map)},
                    "untwisted": untw.to_json(),
                    "rows": [r.to_json() for r in rows],
                    "ratios": ratios,
                    "max_ratio_residual": max_res,
                    "covanishing": cov,
                    "odd_coefficients_exact": odd_ok,
                    "even_d_in_ratio": even_used,
                    "ok": good,
                }
            )
    detail = {"cell": cell, "chi": chi, "forms": forms}
    if exact_subidentities:
        subs = []
        for d in ds:
            if (-p * d) % 4 != 1:
                continue
            S = KSetting(-p * d, p)
            for rep in (formula_B(S, m_max), g_A_crosscheck(S, prec), core_identity(S)):
                subs.append({"identity": rep.name, "d": d, "verdict": rep.passed})
                ok &= rep.passed
        detail["exact"] = subs
    return IdentityReport("main", {"p": p, "ds": ds, "cell": cell}, None, None, ok and bool(forms), detail, time.time() - t0)
