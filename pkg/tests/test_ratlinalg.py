from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from levelp2 import _fpenum_py, ratlinalg
from levelp2.errors import FormError, RankError
from levelp2.ratlinalg import (
    dual_lattice,
    hnf,
    is_positive_definite,
    lattice_index,
    lattice_intersection,
    lattice_sum,
    mat_det,
    mat_inv,
    mat_mul,
    nullspace_rat,
    rank_rat,
    reduce_gram,
    value_histogram,
    vectors_in_range,
)

small = st.integers(-6, 6)
vec4 = st.lists(small, min_size=4, max_size=4)


def _full_rank(rows):
    return rank_rat(rows) == 4


@given(st.lists(vec4, min_size=4, max_size=7).filter(_full_rank))
def test_hnf_canonical_and_contains_generators(rows):
    L = hnf(rows)
    assert all(L.contains(r) for r in rows)
    assert hnf(L.basis()) == L
    perm = list(reversed(rows))
    assert hnf(perm) == L


@given(st.lists(vec4, min_size=4, max_size=6).filter(_full_rank), st.integers(2, 5))
def test_index_of_scaled_sublattice(rows, k):
    L = hnf(rows)
    M = L.scale(k)
    assert L.contains_lattice(M)
    assert lattice_index(L, M) == k**4


@given(st.lists(vec4, min_size=4, max_size=5).filter(_full_rank), st.lists(vec4, min_size=4, max_size=5).filter(_full_rank))
def test_sum_and_intersection(a, b):
    A, B = hnf(a), hnf(b)
    S, I = lattice_sum(A, B), lattice_intersection(A, B)
    assert S.contains_lattice(A) and S.contains_lattice(B)
    assert A.contains_lattice(I) and B.contains_lattice(I)
    # [S : A] [A : I] = [S : B] [B : I]
    assert lattice_index(S, A) * lattice_index(A, I) == lattice_index(S, B) * lattice_index(B, I)


def test_dual_of_standard_lattice():
    L = hnf([[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 3]])
    Ld = dual_lattice(L)
    assert Ld.contains([Fraction(1, 2), 0, 0, 0]) and Ld.contains([0, 0, 0, Fraction(1, 3)])


def test_rank_deficient_raises():
    with pytest.raises(RankError):
        hnf([[1, 0, 0, 0], [2, 0, 0, 0]], 4).det()


@given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=3, max_size=3))
def test_inverse_and_det(M):
    if mat_det(M) == 0:
        assert rank_rat(M) < 3
        assert nullspace_rat(M)
        return
    Mi = mat_inv(M)
    I = mat_mul(M, Mi)
    assert I == [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]


def _random_pd(draw_rows):
    A = np.array(draw_rows, dtype=np.int64)
    H = A.T @ A * 2
    return H.tolist()


pd_forms = st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=4, max_size=4).filter(
    lambda r: round(abs(np.linalg.det(np.array(r, dtype=float)))) > 0
)


def _box_volume(H, hi):
    Hi = np.linalg.inv(np.array(H, dtype=float))
    return float(np.prod([2 * np.sqrt(hi * Hi[i, i]) + 1 for i in range(len(H))]))


@settings(max_examples=40, deadline=None)
@given(pd_forms, st.integers(0, 60))
def test_fincke_pohst_matches_box_scan(rows, hi):
    H = _random_pd(rows)
    assume(_box_volume(H, hi) < 2e5)
    assert is_positive_definite(H)
    fp = value_histogram(H, hi)
    box = value_histogram(H, hi, method="box")
    assert np.array_equal(fp, box)


@settings(max_examples=40, deadline=None)
@given(pd_forms, st.integers(0, 80))
def test_compiled_and_python_kernels_agree(rows, hi):
    H = np.array(_random_pd(rows), dtype=np.int64)
    a = np.asarray(_fpenum_py.count_values(H, hi))
    b = np.asarray(ratlinalg._kernel.count_values(H, hi))
    assert np.array_equal(a, b)


@settings(max_examples=30, deadline=None)
@given(pd_forms, st.integers(0, 40))
def test_vectors_in_range_values(rows, hi):
    H = _random_pd(rows)
    assume(int(np.sum(value_histogram(H, hi))) < 20000)
    vs = vectors_in_range(H, 0, hi)
    Hn = np.array(H)
    for v in vs:
        x = np.array(v)
        assert 0 <= x @ Hn @ x <= hi
    assert len(vs) == int(np.sum(value_histogram(H, hi)))


@settings(max_examples=30, deadline=None)
@given(pd_forms)
def test_reduce_gram_is_an_isometry(rows):
    H = _random_pd(rows)
    R, U = reduce_gram(H)
    U = np.array(U)
    assert round(abs(np.linalg.det(U))) == 1
    assert (U @ np.array(H) @ U.T).tolist() == R or (U.T @ np.array(H) @ U).tolist() == R


def test_not_positive_definite():
    assert not is_positive_definite([[2, 3], [3, 2]])
    with pytest.raises(FormError):
        value_histogram([[2, 3], [3, 2]], 10)


def test_backend_is_selected():
    assert ratlinalg.BACKEND in ("cython", "python")


def test_environment_forces_python_backend():
    import os
    import subprocess
    import sys

    code = (
        "from levelp2 import ratlinalg; from levelp2.ideals import enumerate_classes;"
        "from levelp2.orders_p2 import build_context;"
        "c = build_context(7); print(ratlinalg.BACKEND, enumerate_classes(c.O_tilde, 7, seeds=c.norm_one).h)"
    )
    env = dict(os.environ, LEVELP2_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "4"]
