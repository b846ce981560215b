import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levelp2.errors import BootstrapError, Indeterminate, InputError
from levelp2.lseries import (
    CoeffStream,
    central_value,
    central_value_at,
    central_value_untwisted,
    coeffs_from_phi,
    coeffs_from_primes,
    hecke_coeffs,
    main_theorem_constant,
    needed_terms,
    square_free_part,
    twist_levels,
    twist_stream,
    untwisted_sign_from_w_tilde,
    waldspurger_ratio,
)
from levelp2.spectra import select_e_f

# the newform of level 49 (CM by Q(sqrt -7))
A49 = [1, 1, 0, -1, 0, 0, 0, -3, -3, 0, 4]
# L(f, 1) = Omega / 2 with real period Omega = 1.93331170...
L49 = 0.9666558528


@pytest.fixture(scope="module")
def f49(s7):
    e = select_e_f(s7.spectrum().new_components()[0])
    return e, hecke_coeffs(e, s7.cl, 2000, 7)


def test_frozen_coefficients(f49):
    _, st = f49
    assert st.a[1:12].tolist() == A49
    assert st.exact[2] == 1 and st.exact[11] == 4


_PRIMES = [q for q in range(2, 40001) if all(q % r for r in range(2, int(q**0.5) + 1))]
_RNG = np.random.default_rng(7)
_TABLE = coeffs_from_primes({q: float(_RNG.integers(-3, 4)) for q in _PRIMES if q != 7}, 7, 40000)


@given(st.integers(1, 200), st.integers(1, 200))
def test_multiplicative(m, n):
    if math.gcd(m, n) == 1:
        assert _TABLE[m * n] == _TABLE[m] * _TABLE[n]


def test_hecke_recursion_and_bad_prime():
    vals = {q: 0.0 for q in _PRIMES if q <= 64}
    vals.update({2: -1.0, 3: 2.0, 5: 1.0})
    a = coeffs_from_primes(vals, 7, 64)
    assert a[1] == 1 and a[7] == 0 and a[49] == 0 and a[14] == 0
    assert a[4] == (-1) ** 2 - 2
    assert a[8] == -1 * a[4] - 2 * a[2]
    assert a[6] == a[2] * a[3]


def test_phi_route_matches_primes(setup):
    sp = setup.spectrum()
    for comp in sp.new_components():
        e = select_e_f(comp)
        for k in range(e.degree):
            st = hecke_coeffs(e, setup.cl, 50, setup.p, k)
            setup.hecke.extend(50)
            b = coeffs_from_phi(e, setup.hecke, 50, k)
            for n in range(1, 51):
                if n % setup.p:
                    assert abs(st.a[n] - b[n]) < 1e-8


def test_untwisted_central_value(f49):
    e, st = f49
    cv = central_value_untwisted(st, e.w_tilde_sign)
    assert abs(cv.value - L49) < 1e-9
    assert cv.sign == 1 and cv.level == 49
    # bootstrap over both signs agrees
    boot = central_value(st)
    assert boot.sign == untwisted_sign_from_w_tilde(e.w_tilde_sign)


def test_cm_twist_is_itself(f49):
    """a(n) vanishes whenever (-7|n) = -1, so the twist by -7 is the same form."""
    _, st = f49
    tw = central_value(twist_stream(st, -7))
    assert tw.level == 49 and abs(tw.value - L49) < 1e-9


def test_negative_sign_gives_zero(s11):
    comp = next(c for c in s11.spectrum().new_components() if c.vectors[0].w_tilde_sign == -1)
    e = select_e_f(comp)
    st = hecke_coeffs(e, s11.cl, needed_terms(121), 11)
    cv = central_value_untwisted(st, -1)
    assert cv.value == 0.0 and cv.spread < 1e-8


def test_wrong_level_detected(f49):
    _, st = f49
    assert central_value_at(st, 49, 1).spread < 1e-8
    assert central_value_at(st, 50, 1).spread > 1e-4
    assert central_value_at(st, 49, -1).spread > 1e-4


def test_bootstrap_requires_unique_candidate(f49):
    _, st = f49
    with pytest.raises(BootstrapError):
        central_value(st, levels=[50, 51], signs=(1,))


def test_non_new_rejected(s7):
    old = next(v for v in s7.spectrum().vectors() if v.classification != "new")
    with pytest.raises(InputError):
        hecke_coeffs(old, s7.cl, 10, 7)


def test_ratio_identities():
    assert waldspurger_ratio(7, 5, 5, 1, 1, 0.3, 0.3) == 0.0
    with pytest.raises(Indeterminate):
        waldspurger_ratio(7, 1, 5, 1, 0, 0.0, 0.0)
    # exact proportionality gives zero residual
    L1, L2, c1, c2 = 0.8, 0.8 * 4 * math.sqrt(1 / 5), 1, 2
    assert waldspurger_ratio(7, 1, 5, c1, c2, L1, L2) < 1e-14
    assert main_theorem_constant(7, 5, 2, 1.0) == pytest.approx(math.sqrt(35) / 4)


def test_twist_levels():
    assert twist_levels(7, -35) == [245, 1225, 1715, 8575, 12005, 60025]
    assert all(M % 49 == 0 and M % 35 == 0 for M in twist_levels(7, -35))


def test_square_free_part():
    assert [square_free_part(n) for n in (1, 12, 49, 50, 105)] == [1, 3, 1, 2, 105]


def test_coeff_stream_basics():
    s = CoeffStream(np.array([0.0, 1.0, -1.0]), 7)
    assert s.nmax == 2 and s[2] == -1.0
