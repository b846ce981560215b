import itertools
from fractions import Fraction

import numpy as np
import pytest

from levelp2.errors import InputError
from levelp2.orders_p2 import (
    _delta_kernel,
    bilateral_from_suborder,
    build_algebra,
    build_context,
    build_context_from_K,
    char_chi_suborder,
    choose_q,
    delta_divisible_scan,
    hilbert_symbol,
    is_bilateral,
    nrd_zero_set,
    ramified_places,
    suborder_from_bilateral,
)

INF = 0


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23, 29, 31])
def test_algebra_ramification(p):
    B = build_algebra(p)
    assert ramified_places(B.a, B.b) == (INF, p)


def test_hilbert_symbol_product_formula():
    for a in (-1, -2, -3, -7, 5, 6, -11):
        for b in (-1, -5, 3, -13, 7):
            places = [INF, 2, 3, 5, 7, 11, 13]
            prod = 1
            for v in places:
                prod *= hilbert_symbol(a, b, v)
            assert prod == 1


def test_even_prime_rejected():
    with pytest.raises(InputError):
        build_context(2)


def test_discriminants(setup):
    ctx, p = setup.ctx, setup.p
    assert ctx.O_max.disc == p
    assert ctx.O_tilde.disc == p * p
    assert ctx.O_tilde.index_in(ctx.O_max) == p
    assert ctx.P_max * ctx.P_max == ctx.O_max.scale(p)


def test_p_divisible_delta_scan_matches_kernel(setup):
    """The index-p suborder as a brute-force zero set equals the linear kernel."""
    O, p = setup.ctx.O_max, setup.p
    Z = delta_divisible_scan(O, p)
    assert len(Z) == p**3
    ker = np.array(_delta_kernel(O, p), dtype=np.int64)
    combos = np.array(list(itertools.product(range(p), repeat=len(ker))), dtype=np.int64)
    span = {tuple(v) for v in (combos @ ker) % p}
    assert span == {tuple(v) for v in Z % p}
    assert len(nrd_zero_set(O, p)) == p**2


def test_suborders(setup):
    ctx, p = setup.ctx, setup.p
    subs = ctx.suborders
    assert len(subs) == p + 1
    assert len({s.order for s in subs}) == p + 1
    signs = [s.character_sign for s in subs]
    assert signs.count(1) == signs.count(-1) == (p + 1) // 2
    for s in subs:
        assert s.order.disc == p**3
        assert s.order.index_in(ctx.O_tilde) == p
        assert is_bilateral(s.source_ideal, ctx.O_tilde)
        assert bilateral_from_suborder(s.order, ctx.O_tilde, p) == s.source_ideal
        assert suborder_from_bilateral(s.source_ideal, ctx.O_tilde, p).order == s.order


def test_suborder_character_routes(s7):
    """Norm-form character of the ideal agrees with the discriminant character of the order."""
    for s in s7.ctx.suborders:
        assert char_chi_suborder(s.order, 7, witnesses=3) == s.character_sign


def test_norm_one_bilaterals(setup):
    ctx, p = setup.ctx, setup.p
    N1 = ctx.norm_one
    assert len(N1) == p + 1
    assert ctx.O_tilde in N1
    for L in N1:
        assert L.norm == 1
        assert is_bilateral(L, ctx.O_tilde)


@pytest.mark.parametrize("D,p", [(-7, 7), (-35, 7), (-55, 11), (-39, 13)])
def test_k_aligned_context(D, p):
    ctx = build_context_from_K(D, p)
    assert ctx.O_max.disc == p and ctx.O_tilde.disc == p * p
    k = ctx.kdata
    assert ctx.O_tilde.contains(k.omega)
    assert ctx.O_tilde.contains((Fraction(1, 2), Fraction(1, 2), 0, 0))


def test_choose_q_conditions():
    from levelp2.arith import legendre

    for D, p in [(-7, 7), (-35, 7), (-55, 11), (-39, 13), (-91, 13)]:
        q = choose_q(D, p)
        p_star = p if p % 4 == 1 else -p
        assert legendre(-q, p) == -1 and (q + 1) % abs(D // p_star) == 0 and (2 * D) % q


def test_choose_q_rejects_even():
    with pytest.raises(InputError):
        choose_q(-28, 7)
