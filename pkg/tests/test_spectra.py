import numpy as np
import pytest

from levelp2.spectra import is_eisenstein, pizer_dimension, select_e_f

# Hecke eigenvalues of the newform class at level 49 (a_2, a_3, a_5)
A49 = {2: 1, 3: 0, 5: 0}

PIZER = {7: (1, 1, 1), 11: (2, 2, 3), 13: (1, 1, 2)}  # (old, twist, new components)


def _counts(sp):
    cls = [c.vectors[0].classification for c in sp.components]
    return cls.count("old"), cls.count("quadratic-twist"), cls.count("new")


def test_multiplicity_one_and_dimensions(setup):
    sp = setup.spectrum()
    assert _counts(sp) == PIZER[setup.p]
    assert sum(c.dim * c.field.degree for c in sp.components) == setup.cl.h
    for c in sp.components:
        assert len(c.vectors) == c.dim
        for v in c.vectors:
            assert c.dim == pizer_dimension(v.classification)
    assert sum(is_eisenstein(c) for c in sp.components) == 1


def test_new_component_p7(s7):
    new = s7.spectrum().new_components()
    assert len(new) == 1
    c = new[0]
    assert c.dim == 2 and c.field.degree == 1
    assert {ell: c.eigen_map[ell].to_fraction() for ell in A49} == A49
    assert sorted(v.w_p_sign for v in c.vectors) == [-1, 1]
    assert select_e_f(c).w_p_sign == 1


P11_NEW = [
    {2: -1, 3: 2, 5: 1, 7: 2},
    {2: 0, 3: -1, 5: -3, 7: 0},
    {2: 1, 3: 2, 5: 1, 7: -2},
]


def test_new_components_p11(s11):
    got = []
    for c in s11.spectrum().new_components():
        assert c.field.degree == 1
        got.append({ell: int(c.eigen_map[ell].to_fraction()) for ell in (2, 3, 5, 7)})
    assert sorted(got, key=lambda d: sorted(d.items())) == sorted(P11_NEW, key=lambda d: sorted(d.items()))


def test_cubic_new_components_p13(s13):
    new = s13.spectrum().new_components()
    assert [c.field.degree for c in new] == [3, 3]
    assert sorted(c.vectors[0].w_tilde_sign for c in new) == [-1, 1]


def test_eigenvectors_are_eigen(setup):
    sp = setup.spectrum()
    for v in sp.vectors():
        assert v.residual < 1e-8
        for k in range(v.degree):
            x = v.coords_float(k)
            for ell in (2, 3):
                T = sp.ops.t_op(ell)
                assert np.allclose(T @ x, v.eigenvalue_float(ell, k) * x, atol=1e-8)


def test_spectrum_independent_of_cell(s7):
    a = s7.spectrum(s7.G.norm_p[0])
    b = s7.spectrum(s7.G.norm_p[-1])
    ea = sorted(tuple(c.eigen_map[ell].to_fraction() for ell in (2, 3, 5)) for c in a.components)
    eb = sorted(tuple(c.eigen_map[ell].to_fraction() for ell in (2, 3, 5)) for c in b.components)
    assert ea == eb


def test_old_embedding_equivariant(s7):
    from levelp2.hecke_ops import HeckeData
    from levelp2.spectra import check_old_equivariance

    sp = s7.spectrum()
    assert check_old_equivariance(sp.old_image, HeckeData(s7.cl_O, 7), s7.hecke, [2, 3, 5])


@pytest.mark.parametrize("p", [7, 11])
def test_spectrum_json(p):
    from conftest import setup_for

    js = setup_for(p).spectrum().to_json()
    assert js["h"] == setup_for(p).cl.h
