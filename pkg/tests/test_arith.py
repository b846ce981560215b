import sympy
from hypothesis import given, settings, strategies as st

from levelp2.arith import (
    divisors,
    factor,
    is_fundamental_discriminant,
    is_prime,
    jacobi,
    kronecker,
    legendre,
    primes_up_to,
    sigma,
    sqrt_mod_prime,
    squarefree,
    valuation,
)


def test_primes_up_to_matches_sympy():
    assert primes_up_to(500) == list(sympy.primerange(2, 501))


@given(st.integers(1, 10**6))
def test_factor_round_trip(n):
    prod = 1
    for q, e in factor(n):
        assert is_prime(q)
        prod *= q**e
    assert prod == n


@given(st.integers(1, 5000))
def test_sigma_and_divisors(n):
    ds = divisors(n)
    assert ds == sorted(ds)
    assert all(n % d == 0 for d in ds)
    assert sigma(n) == sum(ds) == sympy.divisor_sigma(n)


@given(st.integers(-10**4, 10**4), st.sampled_from([3, 5, 7, 11, 13, 101]))
def test_legendre_euler_criterion(a, p):
    r = pow(a % p, (p - 1) // 2, p)
    assert legendre(a, p) == (0 if a % p == 0 else (1 if r == 1 else -1))


@given(st.integers(-500, 500), st.integers(1, 500).filter(lambda n: n % 2 == 1))
def test_jacobi_matches_sympy(a, n):
    assert jacobi(a, n) == sympy.jacobi_symbol(a, n)


@given(st.integers(-300, 300), st.integers(1, 200), st.integers(1, 200))
def test_kronecker_multiplicative_in_n(D, m, n):
    assert kronecker(D, m * n) == kronecker(D, m) * kronecker(D, n)


def test_kronecker_at_two():
    assert [kronecker(D, 2) for D in (-7, -15, -3, -11, -8, -4)] == [1, 1, -1, -1, 0, 0]


@given(st.integers(-2000, -3))
def test_fundamental_discriminant_definition(D):
    if D % 4 == 1:
        expected = squarefree(-D)
    elif D % 4 == 0:
        m = D // 4
        expected = m % 4 in (2, 3) and squarefree(-m)
    else:
        expected = False
    assert is_fundamental_discriminant(D) == expected


@settings(max_examples=50)
@given(st.sampled_from([3, 5, 7, 11, 13, 17, 10007]), st.integers(1, 10**6))
def test_sqrt_mod_prime(p, a):
    a = (a * a) % p
    if a == 0:
        return
    r = sqrt_mod_prime(a, p)
    assert r * r % p == a


def test_valuation():
    assert valuation(7**3 * 5, 7) == 3
    assert valuation(5, 7) == 0
