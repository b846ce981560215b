from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from levelp2.arith import kronecker
from levelp2.errors import InputError
from levelp2.quadfield import (
    FieldK,
    choose_omega,
    compose_forms,
    d_part,
    delta,
    eps_tilde,
    form_value,
    inverse_form,
    is_reduced,
    reduce_form,
    rep_count,
    sigma_A,
    sigma_A_closed,
    sigma_A_split,
    sigma_hypothesis,
)

FIELDS = [(-7, 7), (-35, 7), (-55, 11), (-39, 13), (-455, 7), (-195, 13), (-91, 13)]
CLASS_NUMBERS = {-7: 1, -35: 2, -55: 4, -39: 4, -455: 20, -195: 4, -91: 2, -15: 2, -23: 3, -47: 5}


@pytest.fixture(scope="module", params=FIELDS, ids=[str(D) for D, _ in FIELDS])
def K(request):
    return FieldK(*request.param)


@pytest.mark.parametrize("D,h", sorted(CLASS_NUMBERS.items()))
def test_class_numbers(D, h):
    p = max(q for q in (3, 5, 7, 11, 13, 23, 47) if D % q == 0)
    assert FieldK(D, p).h == h


def test_rejects_even_or_mismatched():
    with pytest.raises(InputError):
        FieldK(-20, 5)
    with pytest.raises(InputError):
        FieldK(-35, 11)


def test_group_law_via_ideals(K):
    one = K.principal()
    for f in K.classes:
        assert K.mul(f, one) == f
        assert K.mul(f, inverse_form(f)) == one
        for g in K.classes:
            assert K.mul(f, g) == K.mul_via_ideals(f, g) == K.mul(g, f)


def test_classes_of_ideals(K):
    for A in K.ideal_reps():
        assert K.class_of_ideal(A) in K.classes


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(-10, 10), st.integers(-10, 10))
def test_reduction_preserves_values(a, b, c):
    D = b * b - 4 * a * c
    if D >= 0 or a <= 0:
        return
    f = (a, b, c)
    g = reduce_form(f)
    assert is_reduced(g)
    assert g[1] ** 2 - 4 * g[0] * g[2] == D
    # same represented values, counted with multiplicity
    for m in range(1, 25):
        assert rep_count(f, m) == rep_count(g, m)


def test_r_principal_two():
    K7 = FieldK(-7, 7)
    # x^2 + xy + 2y^2 = 2 at (0, +-1) and +-(1, -1)
    brute = sum(1 for x in range(-3, 4) for y in range(-3, 4) if x * x + x * y + 2 * y * y == 2)
    assert brute == 4
    assert K7.r_A(K7.principal(), 2) == Fraction(brute, 2) == 2
    assert K7.r_A(K7.principal(), 1) == 1
    assert K7.r_A(K7.principal(), 0) == Fraction(1, 2)
    K35 = FieldK(-35, 7)
    assert K35.r_A((3, 1, 3), 1) == 0


def test_genus_characters(K):
    G = K.genera()
    assert len(G) == 2 ** (len([q for q in range(2, abs(K.D) + 1) if abs(K.D) % q == 0 and all(q % r for r in range(2, q))]) - 1)
    sq = K.squares()
    for f in K.classes:
        assert (K.genus(f) == K.principal_genus()) == (f in sq)


def test_genus_sum_identity(K):
    for n in range(1, 301):
        tot = sum(K.R_genus(g, n) for g in K.genera())
        assert tot == K.R_D(n)


@pytest.mark.parametrize("D,p", [(-35, 7), (-55, 11), (-39, 13)])
def test_R_genus_two_routes(D, p):
    K = FieldK(D, p)
    for n in range(1, 120):
        for g in K.genera():
            assert K.R_genus(g, n) == K.R_genus(g, n, method="lattice")


def test_sigma_closed_form(K):
    N = K.p**2
    checked = 0
    for f in K.classes:
        for n in range(1, 400):
            if sigma_hypothesis(K, f, n, N):
                checked += 1
                assert sigma_A(K, f, n, N) == sigma_A_closed(K, f, n, N)
    assert checked > 0


def test_sigma_product_law(K):
    N = K.p**2
    for f in K.classes:
        for n in range(1, 300):
            n0 = d_part(n, K.D)
            assert sigma_A(K, f, n, N) == sigma_A_split(K, f, n0, n // n0, N) * K.R_D(n // n0)


def test_sigma_zero(K):
    N = K.p**2
    for f in K.classes:
        assert sigma_A(K, f, 0, N) == Fraction(K.h, 2 * K.u)


def test_q_set_single_genus(K):
    assert len(K.q_set(K.p**2)) == 1


def test_eps_tilde_ratio_law(K):
    N = K.p**2
    f = K.classes[-1]
    for n in range(1, 80):
        for d in (x for x in range(1, n + 1) if n % x == 0):
            for ell in (2, 3, 5, 11, 17):
                if K.D % ell == 0 or n % (d * ell):
                    continue
                assert eps_tilde(K, f, n, d * ell, N) == eps_tilde(K, f, n, d, N) * kronecker(K.D, ell)


def test_delta_examples():
    assert delta(14, -7) == 2
    assert delta(9, -7) == 1
    assert delta(15, -15) == 4


def test_omega():
    x, y = choose_omega(-35, 7)
    # trace p, discriminant D
    assert 2 * x == 7
    assert (2 * x) ** 2 - 4 * (x * x - y * y * -35) == -35


def test_form_values_and_composition():
    f = (2, 1, 3)
    g = compose_forms(f, f)
    assert g[1] ** 2 - 4 * g[0] * g[2] == -23
    assert form_value(f, 1, 1) == 6
