import os
import subprocess
import sys

import numpy as np
import pytest
import sympy
from sympy import GF, ZZ
from sympy.matrices.normalforms import smith_normal_form
from sympy.polys.matrices import DomainMatrix
from hypothesis import given, settings, strategies as st

from wittlab import _kernels as kern

needs_numba = pytest.mark.skipif(not kern._HAVE_NUMBA, reason="numba not installed")


def _matrix(data, p, max_side=7):
    m = data.draw(st.integers(1, max_side))
    n = data.draw(st.integers(1, max_side))
    entries = data.draw(st.lists(st.integers(0, p - 1), min_size=m * n, max_size=m * n))
    return np.array(entries, dtype=np.int64).reshape(m, n)


def _sympy_rank_mod(A, p):
    dm = DomainMatrix.from_list_sympy(*A.shape, A.tolist()).convert_to(GF(p))
    return dm.rank()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.data())
def test_rref_rank_against_sympy(p, data):
    A = _matrix(data, p)
    R, piv = kern.rref_modp_np(A, p)
    assert len(piv) == _sympy_rank_mod(A, p)
    # pivot columns are unit vectors in the reduced form
    for i, c in enumerate(piv):
        col = R[:, c].copy()
        assert col[i] == 1 and not np.delete(col, i).any()


@needs_numba
@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.data())
def test_rref_backends_agree(p, data):
    A = _matrix(data, p)
    Rn, pn = kern.rref_modp_np(A, p)
    Rb, pb = kern.rref_modp_nb(A, p)
    assert np.array_equal(Rn, Rb) and np.array_equal(pn, pb)


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.data())
def test_gf2_packed_backends_agree(data):
    A = _matrix(data, 2, max_side=10)
    W = kern.pack_gf2(A)
    Wn, pn = kern.rref_gf2_packed_np(W, A.shape[1])
    Wb, pb = kern.rref_gf2_packed_nb(W, A.shape[1])
    assert np.array_equal(Wn, Wb) and np.array_equal(pn, pb)
    R, piv = kern.rref_modp_np(A, 2)
    assert np.array_equal(kern.unpack_gf2(Wn, A.shape[1]), R)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, 3), (3, 2), (5, 2)]), st.data())
def test_snf_against_sympy(pk, data):
    p, K = pk
    A = _matrix(data, p ** K, max_side=5)
    vals = sorted(kern.snf_valuations_np(A, p, K).tolist())
    # the SNF over Z of [A | p^K I] has the same p-parts as A over Z/p^K
    m, n = A.shape
    big = sympy.Matrix(np.hstack([A, p ** K * np.eye(m, dtype=np.int64)]).tolist())
    S = smith_normal_form(big, domain=ZZ)
    expect = []
    for i in range(min(S.shape)):
        d = int(S[i, i])
        if d == 0:
            continue
        e = 0
        while d % p == 0 and e < K:
            d //= p
            e += 1
        if e < K:
            expect.append(e)
    assert vals == sorted(expect)


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 3), (3, 2)]), st.data())
def test_snf_backends_agree(pk, data):
    p, K = pk
    A = _matrix(data, p ** K, max_side=5)
    assert np.array_equal(kern.snf_valuations_np(A, p, K), kern.snf_valuations_nb(A, p, K))


@needs_numba
@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 3), (3, 2)]), st.data())
def test_howell_backends_agree(pk, data):
    p, K = pk
    A = _matrix(data, p ** K, max_side=5)
    n = A.shape[1]
    state = []
    for _ in range(2):
        state.append((np.zeros((n, n), np.int64), np.zeros(n, np.bool_), np.zeros(n, np.int64)))
    for row in A:
        g1 = kern.howell_insert_np(*state[0], row, p, K)
        g2 = kern.howell_insert_nb(*state[1], row, p, K)
        assert bool(g1) == bool(g2)
    for a, b in zip(state[0], state[1]):
        assert np.array_equal(a, b)
    probe = np.array(data.draw(st.lists(st.integers(0, p ** K - 1), min_size=n, max_size=n)), dtype=np.int64)
    assert np.array_equal(kern.howell_reduce_np(*state[0], probe, p, K),
                          kern.howell_reduce_nb(*state[1], probe, p, K))


def test_env_switch_selects_numpy():
    env = dict(os.environ, WITTLAB_NO_NUMBA="1")
    res = subprocess.run([sys.executable, "-c", "from wittlab import _kernels; print(_kernels.backend())"],
                         capture_output=True, text=True, env=env, timeout=120)
    assert res.stdout.strip() == "numpy"
