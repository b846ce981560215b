from fractions import Fraction

import pytest

from conftest import ksetting
from levelp2.quadfield import ideal_of_form
from levelp2.verify import (
    b_A_via_formula,
    core_identity,
    core_identity_component,
    fixed_vector,
    formula_B,
    g_A_crosscheck,
    g_A_from_heights,
    heights_side,
    project_norm2,
)
from levelp2.spectra import select_e_f


def test_b_A_small_values():
    S = ksetting(7, 1)
    f = S.K.principal()
    got = [b_A_via_formula(S.K, f, m) for m in range(6)]
    assert got == [Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(0), Fraction(3, 2), Fraction(0)]
    # the same numbers from quaternionic heights
    assert g_A_from_heights(S, ideal_of_form(f), 6).coeffs == got


@pytest.mark.parametrize("p,d", [(7, 1), (7, 5), (11, 1), (13, 3)])
def test_formula_B(p, d):
    rep = formula_B(ksetting(p, d), 12)
    assert rep.passed
    assert len(rep.lhs) == 12 * ksetting(p, d).K.h


def test_formula_B_single_term():
    S = ksetting(7, 5)
    for f in S.K.classes:
        lhs, rhs = heights_side(S, ideal_of_form(f), 7)
        assert lhs == rhs


@pytest.mark.parametrize("p,d", [(7, 1), (7, 13), (11, 5)])
def test_g_A(p, d):
    assert g_A_crosscheck(ksetting(p, d), 30).passed


@pytest.mark.parametrize("p,d", [(7, 1), (7, 5), (7, 13), (11, 1), (11, 5), (13, 3)])
def test_core_identity(p, d):
    rep = core_identity(ksetting(p, d))
    assert rep.passed, rep.detail


def test_core_identity_old_components():
    assert core_identity(ksetting(7, 5), only_new=False).passed


def test_core_identity_both_zero_branch():
    S = ksetting(13, 3)
    rep = core_identity(S)
    rows = rep.detail["results"]
    assert any(r["w_tilde_sign"] == -1 for r in rows)
    for r in rows:
        if r["w_tilde_sign"] == -1:
            assert r["both_zero"]


def test_core_identity_scale_invariance():
    """Rescaling the basis of the component leaves both sides unchanged."""
    S = ksetting(7, 5)
    comp = S.spectrum.new_components()[0]
    cell = S.p0
    base = core_identity_component(S, comp, cell)
    K = comp.field
    three = K.elem(3)
    comp.basis = [[three * x for x in b] for b in comp.basis]
    try:
        scaled = core_identity_component(S, comp, cell)
    finally:
        inv = K.elem(Fraction(1, 3))
        comp.basis = [[inv * x for x in b] for b in comp.basis]
    assert scaled.lhs == base.lhs and scaled.rhs == base.rhs
    assert scaled.c_d == base.c_d * three or scaled.c_d == base.c_d * inv or scaled.c_d == base.c_d


def test_projection_of_eigenvector_is_itself():
    S = ksetting(7, 1)
    comp = S.spectrum.new_components()[0]
    w = S.classes.weights
    e = fixed_vector(S, comp, S.p0)
    norm = sum((x * x * wi for x, wi in zip(e, w)), comp.field.zero())
    assert project_norm2(comp, e, w) == norm


def test_e_f_is_fixed_by_p0():
    S = ksetting(7, 1)
    comp = S.spectrum.new_components()[0]
    e = fixed_vector(S, comp, S.p0)
    ef = select_e_f(comp)
    ratio = None
    for a, b in zip(e, ef.coords):
        if not b.is_zero():
            ratio = a / b
            break
    assert all(a == ratio * b for a, b in zip(e, ef.coords))
