"""The twelve acceptance criteria.  Each test records one PASS/FAIL line that is
printed in the terminal summary and then asserts."""

from __future__ import annotations

import time
from fractions import Fraction
from math import gcd

import numpy as np

from conftest import ACCEPTANCE_LINES, PRIMES, ksetting, setup_for
from sympy import totient

from levelp2.arith import divisors, kronecker, legendre, sigma
from levelp2.hecke_ops import brandt_explicit, check_self_adjoint, class_permutation
from levelp2.quadfield import FieldK, d_part, sigma_A, sigma_A_closed, sigma_A_split, sigma_hypothesis
from levelp2.specialpoints import expected_count, special_points, split_C_p
from levelp2.theta import ThetaTable, shimura_defect
from levelp2.verify import (
    core_identity,
    formula_B,
    fundamental_ds,
    g_A_crosscheck,
    main_theorem_report,
    theta_coefficients,
)

# d ranges for the analytic criterion (coefficient budget grows like (p d)^2)
MAIN_DMAX = {7: 60, 11: 30, 13: 20}


def record(k: int, ok: bool, text: str) -> None:
    ACCEPTANCE_LINES[k] = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {text}"
    print(ACCEPTANCE_LINES[k])


def _nonzero(xs) -> bool:
    return any(not (x == 0 or (hasattr(x, "is_zero") and x.is_zero())) for x in xs)


def test_criterion_01_discriminants():
    bad = []
    for p in PRIMES:
        ctx = setup_for(p).ctx
        if ctx.O_max.disc != p or ctx.O_tilde.disc != p * p:
            bad.append((p, "O or O_tilde"))
        subs = ctx.suborders
        if len(subs) != p + 1 or any(s.order.disc != p**3 for s in subs):
            bad.append((p, "suborders"))
    record(1, not bad, f"disc(O) = p, disc(O~) = p^2, p+1 suborders of disc p^3 for p in {PRIMES}")
    assert not bad


def test_criterion_02_bilateral_group():
    bad = []
    for p in PRIMES:
        G = setup_for(p).G
        n = G.order
        if n != 2 * (p + 1):
            bad.append((p, "order"))
        # dihedral presentation: rho of order p+1, every norm-p element s an involution with s rho s = rho^-1
        if G.element_order(G.rho) != p + 1:
            bad.append((p, "rho"))
        rinv = G.inverse(G.rho)
        for s in G.norm_p:
            if G.element_order(s) != 2 or G.mul(G.mul(s, G.rho), s) != rinv:
                bad.append((p, "reflection", s))
        # associativity of the full table
        T = np.array(G.table)
        for a in range(n):
            if not np.array_equal(T[T[a]], T[a][T]):
                bad.append((p, "associativity"))
                break
        chis = [G.chi[s] for s in G.norm_p]
        if chis.count(1) != (p + 1) // 2 or chis.count(-1) != (p + 1) // 2:
            bad.append((p, "chi split"))
    record(2, not bad, "group of order 2(p+1), dihedral relations, (p+1)/2 norm-p ideals of each chi sign")
    assert not bad


def test_criterion_03_brandt():
    t0 = time.time()
    bad = []
    for p in PRIMES:
        s = setup_for(p)
        h = s.cl.h
        if not np.array_equal(s.hecke.brandt(1).as_array(), np.eye(h, dtype=np.int64)):
            bad.append((p, "B(1)"))
        for m in range(1, 31):
            B = s.hecke.brandt(m)
            if m % p and B.row_sums() != [sigma(m)] * h:
                bad.append((p, m, "row sums"))
            if not check_self_adjoint(B, s.cl.weights):
                bad.append((p, m, "self-adjoint"))
            if m % p and not np.array_equal(brandt_explicit(s.cl, m).as_array(), B.as_array()):
                bad.append((p, m, "explicit enumeration"))
        ops = {m: s.hecke.brandt(m).operator() for m in range(2, 31)}
        for a in ops:
            for b in ops:
                if a < b and not np.array_equal(ops[a] @ ops[b], ops[b] @ ops[a]):
                    bad.append((p, a, b, "commute"))
        if not np.array_equal(ops[2] @ ops[3], ops[6]):
            bad.append((p, "B2 B3 = B6"))
    record(3, not bad, f"B(1) = I, row sums sigma(m), explicit = theta for m <= 30, commuting, self-adjoint, B2B3 = B6 ({time.time() - t0:.0f}s)")
    assert not bad


def _genus_X0(N: int) -> int:
    """Genus of X_0(N) from the index, elliptic points and cusps."""
    fac = [q for q in divisors(N) if q > 1 and all(q % r for r in range(2, q))]
    mu = N
    for q in fac:
        mu = mu * (q + 1) // q
    nu2 = 0 if N % 4 == 0 else int(np.prod([1 + kronecker(-4, q) for q in fac]))
    nu3 = 0 if N % 9 == 0 else int(np.prod([1 + kronecker(-3, q) for q in fac]))
    cusps = sum(totient(gcd(d, N // d)) for d in divisors(N))
    g = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    assert g.denominator == 1
    return int(g)


# newforms of level p^2 that are twists of level-p forms by characters of order > 2;
# Pizer's table gives them multiplicity 0.  At 13 they come from the two forms of S_2(Gamma_1(13)).
INVISIBLE = {7: 0, 11: 0, 13: 2}


def test_criterion_04_multiplicity_one():
    bad = []
    summary = []
    for p in PRIMES:
        s = setup_for(p)
        sp = s.spectrum()
        comps = sp.components
        # joint eigenspaces of t and W_p are one-dimensional: each component splits into distinct W_p signs
        for c in comps:
            if len({v.w_p_sign for v in c.vectors}) != c.dim:
                bad.append((p, c.index, "W_p split"))
        # eigen systems of t alone are pairwise distinct across components
        keys = {(str(c.field.to_json()), str(sorted((ell, str(lam.coeffs())) for ell, lam in c.eigen_map.items()))) for c in comps}
        if len(keys) != len(comps):
            bad.append((p, "repeated eigen system"))
        dims = {"old": 1, "quadratic-twist": 1, "new": 2}
        for c in comps:
            if c.dim != dims[c.vectors[0].classification]:
                bad.append((p, c.index, "Pizer dimension"))
        if sum(c.dim * c.field.degree for c in comps) != s.cl.h:
            bad.append((p, "total dimension"))
        new_forms = sum(c.field.degree for c in comps if c.vectors[0].classification == "new")
        cusp_twists = sum(
            c.field.degree for c in comps if c.vectors[0].classification == "quadratic-twist" and not _is_eis_twist(c, p)
        )
        g_new = _genus_X0(p * p) - 2 * _genus_X0(p)
        if g_new != new_forms + cusp_twists + INVISIBLE[p]:
            bad.append((p, "new dimension", g_new, new_forms, cusp_twists))
        summary.append(f"p={p}: h={s.cl.h}, new={new_forms}")
    s7 = setup_for(7).spectrum()
    if not any(c.dim == 2 for c in s7.components):
        bad.append((7, "no 2-dimensional component"))
    record(4, not bad, "t + W_p eigenspaces 1-dim, Pizer dims, new count = genus(X0(p^2)) - 2 genus(X0(p)) - invisible; " + ", ".join(summary))
    assert not bad


def _is_eis_twist(c, p) -> bool:
    """The twist of the Eisenstein vector has eigenvalues chi(l)(l+1)."""
    return all(lam == legendre(ell, p) * (ell + 1) for ell, lam in c.eigen_map.items())


SIGMA_FIELDS = [(-7, 7), (-15, 5), (-35, 7), (-55, 11), (-39, 13)]


def test_criterion_05_genus_theory():
    t0 = time.time()
    bad = []
    checked = 0
    for D, p in SIGMA_FIELDS:
        K = FieldK(D, p)
        N = p * p
        for f in K.classes:
            for n in range(1, 10001):
                if sigma_hypothesis(K, f, n, N):
                    checked += 1
                    if sigma_A(K, f, n, N) != sigma_A_closed(K, f, n, N):
                        bad.append((D, f, n, "closed form"))
            for n in range(1, 2001):
                n0 = d_part(n, D)
                if sigma_A(K, f, n, N) != sigma_A_split(K, f, n0, n // n0, N) * K.R_D(n // n0):
                    bad.append((D, f, n, "product law"))
        for n in range(1, 501):
            if sum(K.R_genus(g, n) for g in K.genera()) != K.R_D(n):
                bad.append((D, n, "genus sum"))
            if n <= 150 and any(K.R_genus(g, n) != K.R_genus(g, n, method="lattice") for g in K.genera()):
                bad.append((D, n, "R_genus routes"))
    record(5, not bad, f"sigma_A closed form on {checked} applicable (class, n <= 10^4), product law, genus sums ({time.time() - t0:.0f}s)")
    assert not bad


def _odd_cases(dmax: int = 60):
    return [(p, d) for p in PRIMES for d in fundamental_ds(p, dmax)]


def test_criterion_06_formula_B():
    t0 = time.time()
    cases = _odd_cases()
    bad = [(p, d) for p, d in cases if not formula_B(ksetting(p, d), 30).passed]
    record(6, not bad, f"formula B exact for all classes, m <= 30, {len(cases)} discriminants -p d, d <= 60 ({time.time() - t0:.0f}s)")
    assert not bad


def test_criterion_07_g_A():
    t0 = time.time()
    cases = _odd_cases()
    bad = [(p, d) for p, d in cases if not g_A_crosscheck(ksetting(p, d), 50).passed]
    record(7, not bad, f"g_A from class-group data = g_A from heights to prec 50, {len(cases)} discriminants ({time.time() - t0:.0f}s)")
    assert not bad


def test_criterion_08_special_points():
    t0 = time.time()
    bad = []
    n = 0
    for p in PRIMES:
        s = setup_for(p)
        for d in fundamental_ds(p, 60 if p == 7 else 30):
            D = -p * d
            h = FieldK(D, p).h
            pts = special_points(s.cl, D, p)
            if len(pts) != (p + 1) * h or len(pts) != expected_count(D, p):
                bad.append((p, d, "count"))
                continue
            split = split_C_p(s.cl, s.G, pts, D)
            members = sorted(k for v in split.cells.values() for k in v)
            if members != list(range(len(pts))):
                bad.append((p, d, "partition"))
            for cell, v in split.cells.items():
                match = s.G.chi[cell] == legendre(d, p)
                if (not match and v) or (match and len(v) != 2 * h):
                    bad.append((p, d, cell))
            n += 1
    record(8, not bad, f"(p+1) h_D special points, disjoint exhaustive cells, empty iff chi != (d|p), 2 h_D per cell; {n} discriminants ({time.time() - t0:.0f}s)")
    assert not bad


def test_criterion_09_theta_functoriality():
    t0 = time.time()
    bad = []
    prec = 100
    for p in PRIMES:
        s = setup_for(p)
        G, cl = s.G, s.cl
        T = ThetaTable(cl.reps, p, prec)

        def th(i, cell):
            return T.series(i, G.elements[cell]).coeffs

        for P0 in G.norm_p:
            for g in (G.wtilde, P0):
                pi = class_permutation(G, g, cl)
                if any(th(pi[i], P0) != th(i, P0) for i in range(cl.h)):
                    bad.append((p, P0, g))
            for k in range(1, p + 1):
                pi = class_permutation(G, G.power(G.rho, k), cl)
                target = P0
                for _ in range(2 * k):
                    target = G.mul(target, G.rho)
                if any(th(pi[i], P0) != th(i, target) for i in range(cl.h)):
                    bad.append((p, P0, "rho", k))
        sp = s.spectrum()
        P = G.elements[sp.ops.p_index]
        for v in sp.vectors():
            if _nonzero(theta_coefficients(cl, v, P, p, prec - 1)) and (v.w_p_sign, v.w_tilde_sign) != (1, 1):
                bad.append((p, v.component, "sign"))
            if _nonzero(T.vec(v.coords, None)[1:]) and v.classification != "old":
                bad.append((p, v.component, "level 4p"))
    record(9, not bad, f"Theta_P W~ = Theta_P W_P = Theta_P, Theta_P W_rho^k = Theta_(P rho^2k) to prec 100; sign and old-form support ({time.time() - t0:.0f}s)")
    assert not bad


def test_criterion_10_core_identity():
    t0 = time.time()
    bad = []
    both_zero = 0
    rows = 0
    for p, d in _odd_cases():
        rep = core_identity(ksetting(p, d))
        if not rep.passed:
            bad.append((p, d))
        for r in rep.detail["results"]:
            rows += 1
            if r["w_tilde_sign"] == -1:
                if not r["both_zero"]:
                    bad.append((p, d, "W~ = -1 but nonzero"))
                both_zero += 1
    if both_zero == 0:
        bad.append("both-zero branch never exercised")
    record(10, not bad, f"<c_f,c_f>/u^2 = <c_d,e>^2/<e,e> exactly; {rows} (D, f, cell) rows, {both_zero} both-zero ({time.time() - t0:.0f}s)")
    assert not bad


def test_criterion_11_shimura():
    t0 = time.time()
    bad = []
    tested = 0
    prec = 160
    for p in PRIMES:
        s = setup_for(p)
        sp = s.spectrum()
        P = s.G.elements[sp.ops.p_index]
        for v in sp.vectors():
            coeffs = theta_coefficients(s.cl, v, P, p, prec - 1)
            if not _nonzero(coeffs):
                continue
            for ell in (2, 3):
                tested += 1
                if shimura_defect(coeffs, v.eigen_map[ell], ell, p):
                    bad.append((p, v.component, ell))
    if tested == 0:
        bad.append("nothing tested")
    record(11, not bad, f"T_(l^2) relation on Theta_P(e_f) for l in (2, 3), all valid d <= {prec - 1}/l^2; {tested} cases ({time.time() - t0:.0f}s)")
    assert not bad


def test_criterion_12_analytic():
    t0 = time.time()
    bad = []
    max_res = 0.0
    even_pairs = 0
    pairs = 0
    rows = 0
    for p in PRIMES:
        G = setup_for(p).G
        for chi in (1, -1):
            cell = next(s for s in G.norm_p if G.chi[s] == chi)
            rep = main_theorem_report(p, dmax=MAIN_DMAX[p], cell=cell)
            if not rep.passed:
                bad.append((p, chi))
            for f in rep.detail["forms"]:
                rows += len(f["rows"])
                if not f["covanishing"]:
                    bad.append((p, chi, f["component"], "co-vanishing"))
                pairs += len(f["ratios"])
                even_pairs += sum(1 for r in f["ratios"] if r["even"])
                max_res = max(max_res, f["max_ratio_residual"])
    if even_pairs == 0:
        bad.append("no ratio with an even d")
    ok = not bad and max_res <= 1e-4
    record(
        12,
        ok,
        f"ratio residual max {max_res:.1e} over {pairs} pairs ({even_pairs} with even d), co-vanishing on {rows} rows ({time.time() - t0:.0f}s)",
    )
    assert ok, bad
