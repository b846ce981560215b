from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from levelp2.errors import AlgebraError, InputError
from levelp2.orders_p2 import build_algebra, maximal_order
from levelp2.quatcore import QuatAlgebra, lattice_conj, lattice_inverse, lattice_product, standard_order

coord = st.fractions(min_value=-20, max_value=20, max_denominator=6)
elem = st.tuples(coord, coord, coord, coord)
ALG = QuatAlgebra(-1, -7)


@given(elem, elem)
def test_nrd_multiplicative(x, y):
    assert ALG.nrd(ALG.mul(x, y)) == ALG.nrd(x) * ALG.nrd(y)


@given(elem, elem, elem)
def test_associative(x, y, z):
    assert ALG.mul(ALG.mul(x, y), z) == ALG.mul(x, ALG.mul(y, z))


@given(elem)
def test_conjugate_and_trace(x):
    e = ALG.element(*x)
    assert (e * e.conj()).coords == (e.nrd(), 0, 0, 0)
    # x^2 - tr(x) x + nrd(x) = 0
    lhs = e * e - e * e.trace() + ALG.one() * e.nrd()
    assert lhs.is_zero()


@given(elem.filter(lambda x: any(x)))
def test_inverse(x):
    e = ALG.element(*x)
    assert (e * e.inverse()).coords == (1, 0, 0, 0)


def test_definite_only():
    with pytest.raises(InputError):
        QuatAlgebra(1, -1)


def test_mixing_algebras_rejected():
    with pytest.raises(AlgebraError):
        ALG.one() * QuatAlgebra(-1, -3).one()


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23])
def test_maximal_order_discriminant(p):
    O = maximal_order(build_algebra(p))
    assert O.is_order()
    assert O.disc == p
    assert O.right_order() == O and O.left_order() == O


def test_lattice_inverse_and_conj():
    O = maximal_order(build_algebra(7))
    I = lattice_product(O, O)
    assert I == O
    assert lattice_conj(O) == O
    assert lattice_inverse(O) == O


def test_standard_order_is_order():
    Z = standard_order(ALG)
    assert Z.is_order()
    assert Z.contains((Fraction(0), Fraction(1), Fraction(0), Fraction(0)))
