import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wittlab.discont import (SymbolicTwoForm, TwoForm, bek_family, dlog_wedge_e, expand_e,
                             exact_weight, interior_rank, symplectic_decomposition, weight)
from wittlab.errors import ExactSearchInfeasible, GuardError
from wittlab.fields import GF
from wittlab.poly import Poly


def test_weight_examples():
    assert weight(TwoForm.basis_sum(2, 4, [(0, 1), (2, 3)])).exact == 2
    w = weight(TwoForm.basis_sum(2, 4, [(0, 1), (2, 3)]))
    assert w.rank == 4 and w.lower_bound == 2
    assert weight(TwoForm.basis_sum(2, 4, [(0, 1)])).exact == 1
    assert weight(TwoForm(2, 4)).exact == 0


def test_weight_three_over_f3():
    w = weight(TwoForm.basis_sum(3, 6, [(0, 1), (2, 3), (4, 5)]))
    assert w.exact == 3 and w.lower_bound == 3


def test_exact_search_limits():
    with pytest.raises(ExactSearchInfeasible):
        exact_weight(TwoForm.basis_sum(5, 4, [(0, 1)]))
    # the bound is still returned
    w = weight(TwoForm.basis_sum(5, 4, [(0, 1), (2, 3)]))
    assert w.lower_bound == 2 and w.exact is None


def test_from_terms_antisymmetric():
    f = TwoForm.from_terms(3, 3, [(1, 0, 1), (2, 1, 0)])
    assert f.is_zero()


def test_symplectic_decomposition_rebuilds_form():
    f = TwoForm.from_terms(2, 4, [(1, 0, 1), (1, 0, 2), (1, 2, 3)])
    parts = symplectic_decomposition(f)
    assert len(parts) == interior_rank(f) // 2


def _decomposable_sums(p, dim, k):
    """Every sum of at most k decomposable forms, by brute force over vectors."""
    vecs = [np.array(v) for v in itertools.product(range(p), repeat=dim)]
    decs = set()
    for x in vecs:
        for y in vecs:
            m = (np.outer(x, y) - np.outer(y, x)) % p
            decs.add(tuple(m.ravel()))
    levels = [{tuple([0] * (dim * dim))}]
    for _ in range(k):
        nxt = set()
        for a in levels[-1]:
            for d in decs:
                nxt.add(tuple((np.array(a) + np.array(d)) % p))
        levels.append(nxt | levels[-1])
    return levels


_LEVELS = _decomposable_sums(2, 4, 2)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=6, max_size=6))
def test_exact_weight_matches_brute_force(upper):
    m = np.zeros((4, 4), dtype=np.int64)
    for (i, j), c in zip(itertools.combinations(range(4), 2), upper):
        m[i, j], m[j, i] = c, -c
    f = TwoForm(2, 4, m)
    key = tuple((m % 2).ravel())
    brute = next(k for k, lv in enumerate(_LEVELS) if key in lv)
    assert exact_weight(f) == brute


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(2, 5), st.data())
def test_rank_even_and_bound_is_exact(p, dim, data):
    upper = data.draw(st.lists(st.integers(0, p - 1), min_size=dim * (dim - 1) // 2,
                               max_size=dim * (dim - 1) // 2))
    m = np.zeros((dim, dim), dtype=np.int64)
    for (i, j), c in zip(itertools.combinations(range(dim), 2), upper):
        m[i, j], m[j, i] = c, -c
    w = weight(TwoForm(p, dim, m))
    assert w.rank % 2 == 0
    assert w.lower_bound == w.exact


def test_expand_monomial():
    taus = expand_e([("t^2", "b", "c")], ["b", "c"], 4)
    assert [t.is_zero() for t in taus] == [True, True, False, True]
    assert taus[2].format() == "(1)*db^dc"


def test_expand_drops_dt():
    taus = expand_e([("1", "b*t", "c*t")], ["b", "c"], 4)
    assert taus[2].format() == "(1)*db^dc"
    assert all(taus[i].is_zero() for i in (0, 1, 3))


def test_expand_constant_in_t():
    taus = expand_e([("1", "b", "c")], ["b", "c"], 2)
    assert taus[0].format() == "(1)*db^dc" and taus[1].is_zero()


def test_single_symbol_family():
    rep = bek_family(2, (1,), 2)
    assert rep.coefficients[2].format() == "(1)*db1_1^dc1_1"
    assert rep.stages[0].congruence_holds


def test_empty_family():
    rep = bek_family(2, (1,), 1)
    assert rep.stages == []
    assert all(c.is_zero() for c in rep.coefficients)


def test_family_growth():
    rep = bek_family(2, (1, 2, 3), 4)
    assert [s.congruence_holds for s in rep.stages] == [True] * 3
    assert [s.relative_weight_bound for s in rep.stages] == [1, 2, 3]
    assert [s.lifting_bound_per_N for s in rep.stages] == [comb(2 * j + 2, 2 * j) for j in (1, 2, 3)]
    assert all(s.absolute_weight_bound >= s.relative_weight_bound for s in rep.stages)
    assert rep.to_json()["stage"] == 4


def test_family_weights_validated():
    with pytest.raises(GuardError):
        bek_family(2, (2, 1), 3)


def test_dlog_wedge_additive_in_first_slot():
    F = GF(2)
    names = ["b", "c", "a", "t"]
    ti, nv, s = 3, 4, 5
    one = Poly.constant(F, nv, 1)
    t = Poly.var(F, nv, ti)
    u1 = one + t * Poly.var(F, nv, 0)
    u2 = one + t * t * Poly.var(F, nv, 2)
    v = one + t * Poly.var(F, nv, 1)
    lhs = dlog_wedge_e(F, names, 3, ti, u1 * u2, v, s)
    rhs = dlog_wedge_e(F, names, 3, ti, u1, v, s) + dlog_wedge_e(F, names, 3, ti, u2, v, s)
    assert (lhs - rhs).is_zero()


def test_symbolic_rank_detects_generic_rank():
    F = GF(2)
    names = ["b", "c", "x", "y", "t"]
    nv = 5
    one = Poly.constant(F, nv, 1)
    x = Poly.var(F, nv, 2)
    form = SymbolicTwoForm(F, names, 4, {(0, 1): one, (2, 3): x})
    assert form.interior_rank() == 4
    assert form.weight_lower_bound() == 2
