from fractions import Fraction

import numpy as np
import pytest

from levelp2.ideals import (
    LeftIdeal,
    hom_histogram,
    hom_lattice_conj,
    hom_lattice_direct,
    is_equivalent,
    same_classes,
    t_m_ideals,
    t_neighbors,
    t_neighbors_scan,
    enumerate_classes,
)

EXPECTED_H = {7: 4, 11: 10, 13: 14}


def test_class_numbers(setup):
    assert setup.cl.h == EXPECTED_H[setup.p]


def test_mass(setup):
    p = setup.p
    assert setup.cl.mass() == Fraction(p * p - 1, 12)
    assert setup.cl_O.mass() == Fraction(p - 1, 12)


def test_reps_are_valid_and_distinct(setup):
    cl = setup.cl
    for a in cl.reps:
        a.validate()
    for i in range(cl.h):
        for j in range(i + 1, cl.h):
            assert not is_equivalent(cl.reps[i], cl.reps[j])


def test_hom_lattice_two_routes(s7):
    reps = s7.cl.reps
    for a in reps:
        for b in reps:
            assert hom_lattice_conj(a, b) == hom_lattice_direct(a, b)


def test_hom_histogram_fp_vs_box(s7):
    reps = s7.cl.reps
    for a in reps[:2]:
        for b in reps:
            assert np.array_equal(hom_histogram(a, b, 12), hom_histogram(a, b, 12, method="box"))


@pytest.mark.parametrize("ell", [2, 3, 5])
def test_neighbours_isotropic_vs_scan(s7, ell):
    for a in s7.cl.reps:
        fast = {n.lattice for n in t_neighbors(a, ell)}
        slow = {n.lattice for n in t_neighbors_scan(a, ell)}
        assert fast == slow
        assert len(fast) == ell + 1


def test_neighbours_isotropic_vs_scan_p11(s11):
    a = s11.cl.reps[3]
    assert {n.lattice for n in t_neighbors(a, 3)} == {n.lattice for n in t_neighbors_scan(a, 3)}


def test_neighbour_norms(s7):
    a = s7.cl.reps[1]
    for b in t_neighbors(a, 3):
        assert b.norm == 3 * a.norm
        assert a.lattice.contains_lattice(b.lattice)
    assert len(t_m_ideals(a, 4)) == 7  # sigma(4)


def test_independent_of_generator_primes(s7):
    other = enumerate_classes(s7.ctx.O_tilde, 7, primes=(3, 5), seeds=s7.ctx.norm_one)
    assert same_classes(s7.cl, other)


def test_classify_right_multiple(s7):
    alg = s7.ctx.algebra
    a = s7.cl.reps[2]
    x = alg.element(1, 1, 0, 1)
    b = a.right_mul(x)
    assert s7.cl.classify(b) == 2
    assert isinstance(b, LeftIdeal)
