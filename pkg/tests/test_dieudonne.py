import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wittlab.dieudonne import (DieudonneComplex, check_saturated, colimit_commutation_test,
                               constant_complex, ker_coker_F_minus_1_mod_p, witt_shadow)
from wittlab.errors import GuardError, PrecisionTooLow


def test_identity_frobenius_is_saturated():
    rep = check_saturated(constant_complex(3, 4, 1))
    assert rep.saturated
    assert rep.V[0].tolist() == [[3]]


def test_multiplication_by_p_not_saturated():
    rep = check_saturated(constant_complex(2, 4, 2))
    assert not rep.saturated
    assert rep.V is None


def test_witt_shadow_has_v_equal_p():
    rep = check_saturated(witt_shadow(5, 3))
    assert rep.saturated and rep.v_precision == 3
    assert rep.V[0].tolist() == [[5]]


def test_zero_frobenius_needs_more_precision():
    with pytest.raises(PrecisionTooLow):
        check_saturated(constant_complex(2, 3, 0))


def test_two_term_complex_with_differential():
    # X^0 -d-> X^1 with d = 1, F^1 = 1, F^0 = p satisfies dF = pFd
    X = DieudonneComplex(2, 4, [1, 1], [[[1]]], [[[2]], [[1]]])
    rep = check_saturated(X)
    assert rep.saturated
    assert rep.v_precision == 3
    assert rep.V[0].tolist() == [[1]] and rep.V[1].tolist() == [[2]]


def test_rejects_bad_commutation():
    with pytest.raises(GuardError):
        DieudonneComplex(2, 4, [1, 1], [[[1]]], [[[1]], [[1]]])


def test_rejects_nonzero_square():
    with pytest.raises(GuardError):
        DieudonneComplex(2, 4, [1, 1, 1], [[[1]], [[1]]])


def test_truncate_cannot_raise():
    with pytest.raises(PrecisionTooLow):
        constant_complex(2, 3).truncate(5)


@pytest.mark.parametrize("F,ker,coker", [(1, 1, 1), (0, 0, 0), (2, 0, 0), (3, 1, 1)])
def test_f_minus_one_scalar(F, ker, coker):
    (k, c), = ker_coker_F_minus_1_mod_p(constant_complex(2, 3, F))
    assert (k.rank, c.rank) == (ker, coker)


def test_f_minus_one_swap():
    X = DieudonneComplex(2, 3, [2], [], [[[0, 1], [1, 0]]])
    (k, c), = ker_coker_F_minus_1_mod_p(X)
    assert k.order == 2 and c.order == 2


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.data())
def test_f_minus_one_against_plain_elimination(p, r, data):
    entries = data.draw(st.lists(st.integers(0, p - 1), min_size=r * r, max_size=r * r))
    F = np.array(entries, dtype=np.int64).reshape(r, r)
    (k, c), = ker_coker_F_minus_1_mod_p(DieudonneComplex(p, 2, [r], [], [F]))
    rk = _gauss_rank(((F - np.eye(r, dtype=np.int64)) % p).tolist(), p)
    assert k.rank == r - rk and c.rank == r - rk


def _gauss_rank(rows, p):
    rows = [r[:] for r in rows]
    rk = 0
    for col in range(len(rows[0]) if rows else 0):
        piv = next((i for i in range(rk, len(rows)) if rows[i][col] % p), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        inv = pow(rows[rk][col], -1, p)
        rows[rk] = [x * inv % p for x in rows[rk]]
        for i in range(len(rows)):
            if i != rk and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rk])]
        rk += 1
    return rk


def test_colimit_constant_chain():
    X = constant_complex(2, 3, 1)
    rep = colimit_commutation_test([X, X, X], [[[[1]]], [[[1]]]])
    assert all(rep.agrees)
    assert rep.colimit_of_invariants == [(1, 1)]


def test_colimit_multiplication_by_p_chain():
    X = constant_complex(2, 3, 1)
    for k, c in ker_coker_F_minus_1_mod_p(X):
        assert k.order == 2
    rep = colimit_commutation_test([X, X, X], [[[[2]]], [[[2]]]])
    assert all(rep.agrees)


def test_colimit_zero_maps():
    X = constant_complex(3, 2, 1)
    rep = colimit_commutation_test([X, X], [[[[0]]]])
    assert all(rep.agrees)
    assert rep.colimit_of_invariants == [(0, 0)] == rep.invariants_of_colimit


def test_colimit_rejects_non_equivariant_map():
    X = constant_complex(2, 3, 1)
    Y = constant_complex(2, 3, 0)
    with pytest.raises(GuardError):
        colimit_commutation_test([X, Y], [[[[1]]]])
