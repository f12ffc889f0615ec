import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wittlab import GF, ring
from wittlab.algebra import build_algebra, ideal_power, quotient_by_ideal
from wittlab.dsl import parse_ring
from wittlab.errors import CapExceeded, NonPrimePower, RingSyntaxError
from wittlab.fields import least_irreducible
from wittlab.linalg import (FiniteAbelianPGroup, FpLinearMap, PresentedGroup, kernel_cokernel,
                            rank, solve_left)


# ---------------------------------------------------------------- fields

@pytest.mark.parametrize("q", [2, 3, 4, 5, 8, 9, 16, 25, 27])
def test_field_axioms_and_frobenius(q):
    F = GF(q)
    elems = list(F.elements())
    assert len(elems) == q
    nonzero = [a for a in elems if a != 0]
    for a in nonzero:
        assert F.mul(a, F.inv(a)) == 1
        assert F.pow(a, q - 1) == 1
    fixed = [a for a in elems if F.frobenius(a) == a]
    assert len(fixed) == F.p
    # Frobenius is additive
    for a, b in itertools.product(elems[:6], repeat=2):
        assert F.frobenius(F.add(a, b)) == F.add(F.frobenius(a), F.frobenius(b))


def test_modulus_is_least_irreducible():
    # independent check: x^2 + x + 1 is the only irreducible quadratic over F_2
    assert tuple(least_irreducible(2, 2)) in {(1, 1, 1)}
    f = least_irreducible(3, 2)
    # no roots in F_3
    assert all(sum(c * x ** i for i, c in enumerate(f)) % 3 for x in range(3))


@pytest.mark.parametrize("q", [4, 8, 9, 25])
def test_multiplicative_group_cyclic(q):
    F = GF(q)
    orders = []
    for a in range(1, q):
        k = 1
        while F.pow(a, k) != 1:
            k += 1
        orders.append(k)
    assert max(orders) == q - 1
    # the class of x generates F_q as an F_p-algebra
    powers = {F.pow(F.generator, k) for k in range(F.e)}
    assert len(powers) == F.e


# ---------------------------------------------------------------- algebras

def test_truncated_polynomial_basis():
    A = ring("GF(2)[t]/(t^2)")
    assert A.dim == 2 and A.local
    assert A.basis_labels() == ["1", "t"]


def test_two_variable_monomial_basis():
    A = ring("GF(2)[x,y]/(x*y, x^3, y^3)")
    assert A.dim == 5 and A.local
    # oracle: standard monomials not divisible by xy, x^3, y^3
    expect = {(a, b) for a in range(3) for b in range(3) if not (a and b)}
    assert len(expect) == 5


def test_nonlocal_split():
    A = ring("GF(3)[t]/(t^2 - 1)")
    assert A.dim == 2 and not A.local
    # CRT oracle: (t+1)/2 and (1-t)/2 are orthogonal idempotents
    e = A.parse("2*t + 2")
    assert np.array_equal(A.mul(e, e), e)


def test_infinite_quotient_refused():
    with pytest.raises(Exception) as exc:
        ring("GF(2)[x,y]/(x^2)")
    assert type(exc.value).__name__ in ("InfiniteDimensional", "CapExceeded")


def test_dimension_cap():
    with pytest.raises(CapExceeded):
        build_algebra(GF(2), ["t"], ["t^70"])


@pytest.mark.parametrize("text", ["GF(2)[t]/(t^4)", "GF(3)[x,y]/(x^2, y^2)", "GF(4)[t]/(t^3)",
                                  "GF(2)[x,y]/(x^2 - y^3, x*y)"])
def test_normal_form_multiplicative_and_closed(text):
    A = ring(text)
    basis = [A.unit_vector(k) for k in range(A.n)]
    for a, b, c in itertools.product(basis, repeat=3):
        assert np.array_equal(A.mul(A.mul(a, b), c), A.mul(a, A.mul(b, c)))
        assert np.array_equal(A.mul(a, b), A.mul(b, a))
    one = A.one()
    for a in basis:
        assert np.array_equal(A.mul(one, a), a)


@pytest.mark.parametrize("text", ["GF(2)[t]/(t^3)", "GF(3)[x,y]/(x^2, x*y, y^2)", "GF(4)[t]/(t^2)"])
def test_local_unit_count(text):
    A = ring(text)
    units = sum(1 for a in A.elements() if A.is_unit(a))
    assert units == (A.q - 1) * A.q ** (A.dim - 1)
    # every non-unit is nilpotent
    assert all(A.is_unit(a) or A.is_nilpotent(a) for a in A.elements())


def test_ideal_power_examples():
    A = ring("GF(2)[t]/(t^4)")
    I2 = ideal_power(A, [A.parse("t")], 2)
    assert I2.shape[0] == 2
    expect = A.span(np.array([A.parse("t^2"), A.parse("t^3")]))
    assert rank(np.vstack([I2, expect]), 2) == 2
    assert ideal_power(A, [A.parse("t")], 5).shape[0] == 0
    B = ring("GF(2)[x,y]/(x^3, y^3, x*y)")
    sq = ideal_power(B, [B.parse("x"), B.parse("y")], 2)
    assert sq.shape[0] == 2


def test_quotient_by_ideal():
    A = ring("GF(2)[t]/(t^4)")
    Q, S = quotient_by_ideal(A, ideal_power(A, [A.parse("t")], 2))
    assert Q.dim == 2
    # the surjection is a ring map
    for a, b in itertools.product(list(A.elements())[:8], repeat=2):
        assert np.array_equal((A.mul(a, b) @ S) % 2, Q.mul((a @ S) % 2, (b @ S) % 2))


# ---------------------------------------------------------------- dsl

def test_parse_errors():
    with pytest.raises(NonPrimePower):
        parse_ring("GF(6)[t]")
    with pytest.raises(RingSyntaxError) as exc:
        parse_ring("GF(2)[t]/(t^2")
    assert exc.value.details["column"] >= 1
    d = parse_ring("GF(4)[x,y]/(x*y, x^3, y^3)")
    assert d.q == 4 and d.generators == ["x", "y"]
    assert d.to_algebra().dim == 5


# ---------------------------------------------------------------- linear algebra

def test_kernel_cokernel_examples():
    kc = kernel_cokernel(FpLinearMap(2, np.zeros((2, 1), np.int64)))
    assert kc.kernel.to_list() == [2, 2] and kc.cokernel.to_list() == [2]
    kc = kernel_cokernel(FpLinearMap(3, np.eye(3, dtype=np.int64)))
    assert kc.kernel.is_trivial() and kc.cokernel.is_trivial()
    kc = kernel_cokernel(FpLinearMap(2, [[1, 1], [0, 0]]))
    assert kc.kernel.to_list() == [2] and kc.cokernel.to_list() == [2]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 6), st.integers(1, 6), st.data())
def test_rank_nullity(p, m, n, data):
    M = np.array(data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=n, max_size=n),
                                    min_size=m, max_size=m)), dtype=np.int64)
    kc = kernel_cokernel(FpLinearMap(p, M))
    r = rank(M, p)
    assert kc.kernel.rank == m - r and kc.cokernel.rank == n - r
    for v in kc.kernel_basis:
        assert not ((v @ M) % p).any()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(1, 4), st.data())
def test_presented_group_order_matches_enumeration(p, K, n, data):
    rows = data.draw(st.lists(st.lists(st.integers(0, p ** K - 1), min_size=n, max_size=n),
                              max_size=3))
    G = PresentedGroup(p, K, n)
    for r in rows:
        G.add_relation(np.array(r, dtype=np.int64))
    # oracle: size of the subgroup generated by rows, by closure
    mod = p ** K
    sub = {tuple([0] * n)}
    frontier = list(sub)
    gens = [tuple(x % mod for x in r) for r in rows]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = tuple((a + b) % mod for a, b in zip(v, g))
                if w not in sub:
                    sub.add(w)
                    nxt.append(w)
        frontier = nxt
    assert G.order * len(sub) == mod ** n
    assert G.invariants().order == G.order


def test_solve_left():
    M = np.array([[1, 0, 1], [0, 1, 1]])
    x = solve_left(M, np.array([1, 1, 0]), 2)
    assert np.array_equal((x @ M) % 2, [1, 1, 0])
    assert solve_left(M, np.array([0, 0, 1]), 2) is None


def test_group_canonical():
    G = FiniteAbelianPGroup(2, (2, 8, 1, 4))
    assert G.to_list() == [8, 4, 2] and G.order == 64
    with pytest.raises(ValueError):
        FiniteAbelianPGroup(2, (6,))
