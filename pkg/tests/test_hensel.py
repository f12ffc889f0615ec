import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wittlab import ring
from wittlab.errors import DerivativeNotUnit, GuardError, NoQuasiInverse, NotNilpotent
from wittlab.hensel import (NonunitalRing, RingPolynomial, hensel_lift, is_henselian_bounded,
                            is_local, localize_nonunital, quasi_inverse, solve_special)


def test_lift_truncated_line():
    A = ring("GF(2)[t]/(t^3)")
    res = hensel_lift(A, "x^2+x+t", A.zero())
    assert A.format(res.root) == A.format(A.parse("t+t^2"))
    assert res.unique


def test_lift_exact_root_returns_start():
    A = ring("GF(2)[t]/(t^3)")
    res = hensel_lift(A, "x^2+x", A.zero())
    assert not res.root.any() and res.steps == 0


def test_lift_derivative_not_unit():
    A = ring("GF(2)[t]/(t^3)")
    with pytest.raises(DerivativeNotUnit):
        hensel_lift(A, "x^2+t", A.zero())


def test_lift_start_not_a_root_mod_m():
    A = ring("GF(2)[t]/(t^3)")
    with pytest.raises(GuardError):
        hensel_lift(A, "x+1", A.zero())


def test_solve_special_examples():
    B = ring("GF(2)[s]/(s^4)")
    s = B.parse("s")
    x = solve_special(B, s, 2)
    assert B.format(x) == B.format(B.parse("1+s+s^3"))
    assert np.array_equal(B.sub(x, B.mul(s, B.mul(x, x))), B.one())
    assert np.array_equal(solve_special(B, B.zero(), 2), B.one())
    assert np.array_equal(solve_special(B, s, 1), B.inverse(B.sub(B.one(), s)))
    with pytest.raises(NotNilpotent):
        solve_special(B, B.one(), 2)


def test_quasi_inverse_nilpotent_ideal():
    A = ring("GF(2)[t]/(t^3)")
    I = NonunitalRing.ideal(A, [A.parse("t")])
    t = A.parse("t")
    y = quasi_inverse(I, t)
    assert A.format(y) == A.format(A.parse("t+t^2"))
    assert not A.add(A.add(t, y), A.mul(t, y)).any()
    assert is_local(I) and I.is_nilpotent() and I.check_axioms()


def test_unit_ideal_of_prime_field():
    F = ring("GF(2)")
    J = NonunitalRing(F, [F.one()])
    assert not is_local(J)
    with pytest.raises(NoQuasiInverse):
        quasi_inverse(J, F.one())
    v = is_henselian_bounded(J)
    assert v.verdict == "not henselian" and v.witness["n"] == 1
    assert localize_nonunital(J).dim == 0


def test_nilpotent_ideal_henselian_and_unchanged_by_localization():
    A = ring("GF(2)[t]/(t^3)")
    I = NonunitalRing.ideal(A, [A.parse("t")])
    assert is_henselian_bounded(I).verdict == "henselian within bounds"
    assert localize_nonunital(I).dim == I.dim


def test_zero_ring_henselian():
    A = ring("GF(3)")
    Z = NonunitalRing(A, np.zeros((0, A.n), np.int64))
    assert is_henselian_bounded(Z).verdict == "henselian within bounds"
    assert is_local(Z)


def test_split_ring_not_local():
    C = ring("GF(3)[t]/(t^2-1)")
    K = NonunitalRing(C, [C.parse("t+1")])
    assert not is_local(K)
    assert is_henselian_bounded(K).verdict == "not henselian"


def test_carrier_must_be_closed():
    A = ring("GF(2)[t]/(t^3)")
    with pytest.raises(GuardError):
        NonunitalRing(A, [A.parse("1+t")])


def _roots_by_enumeration(A, f, alpha0):
    """All roots congruent to alpha0 modulo the maximal ideal."""
    out = []
    for a in A.elements():
        d = A.sub(a, alpha0)
        if A.in_maximal_ideal(d) and not f(a).any():
            out.append(a)
    return out


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, 3), (2, 4), (3, 2), (3, 3)]), st.data())
def test_lift_matches_enumeration(spec, data):
    p, k = spec
    A = ring(f"GF({p})[t]/(t^{k})")
    deg = data.draw(st.integers(1, 3))
    coeffs = [np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=A.n, max_size=A.n)),
                       dtype=np.int64) for _ in range(deg + 1)]
    f = RingPolynomial(A, coeffs)
    # pick a residue that is a simple root of f mod m, if any
    starts = [A.scalar(c) for c in range(p)]
    chosen = None
    for a0 in starts:
        if A.in_maximal_ideal(f(a0)) and A.is_unit(f.derivative()(a0)):
            chosen = a0
            break
    if chosen is None:
        return
    res = hensel_lift(A, f, chosen)
    roots = _roots_by_enumeration(A, f, chosen)
    assert len(roots) == 1
    assert np.array_equal(res.root, roots[0])
