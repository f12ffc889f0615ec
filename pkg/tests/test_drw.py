import pytest

from wittlab import ring
from wittlab.drw import (drw_engine, drw_log, drw_presentation, frobenius_image_check,
                         level_one_matches_forms, oracle_suite, pi_Fbar, telescoping_identity,
                         verify_identities)
from wittlab.errors import CapExceeded
from wittlab.forms import dlog_span, kaehler_space, nu
from wittlab.linalg import FiniteAbelianPGroup
from wittlab.witt import witt_group_invariants

SMALL = ["GF(2)", "GF(4)", "GF(2)[t]/(t^2)", "GF(2)[t]/(t^3)", "GF(3)[t]/(t^2)"]


@pytest.mark.parametrize("text", SMALL)
def test_operator_identities(text):
    eng = drw_engine(ring(text), 3, 2)
    checks = verify_identities(eng, 3, 2)
    for name, c in checks.items():
        assert c.ok, (name, c.failures[:3])
    assert sum(c.checked for c in checks.values()) > 0


@pytest.mark.parametrize("text", SMALL)
def test_oracle_suite(text):
    rep = oracle_suite(drw_engine(ring(text), 3, 2), 3)
    assert all(rep.values()), rep


@pytest.mark.parametrize("text", ["GF(2)[t]/(t^2)", "GF(3)[t]/(t^3)", "GF(2)[x,y]/(x^2,y^2)"])
def test_level_one_is_kaehler(text):
    A = ring(text)
    eng = drw_engine(A, 1, 2)
    for n in range(3):
        assert level_one_matches_forms(eng, n)
        assert eng.group(1, n).order == A.p ** kaehler_space(A, n).dim


@pytest.mark.parametrize("text", ["GF(2)", "GF(4)", "GF(8)", "GF(9)"])
def test_perfect_field_positive_degrees_vanish(text):
    A = ring(text)
    eng = drw_engine(A, 3, 2)
    for L in range(1, 4):
        assert eng.group(L, 0).order == A.p ** (L * A.n)
        for n in (1, 2):
            assert eng.group(L, n).order == 1


@pytest.mark.parametrize("text", SMALL)
def test_degree_zero_is_witt_vectors(text):
    A = ring(text)
    eng = drw_engine(A, 3, 1)
    for L in range(1, 4):
        assert eng.invariants(L, 0) == witt_group_invariants(A, L)


def test_truncated_line_level_two_restricts_onto_forms():
    A = ring("GF(2)[t]/(t^2)")
    C = drw_presentation(A, 2, 1)
    eng = C.engine
    assert C.order % 2 == 0 and C.order > 1
    # R : W_2 -> W_1 is surjective on degree one
    R = eng.R_matrix(2, 1)
    img = (eng.symbols(2, 1) @ R) % 2
    assert eng.group(1, 1).subgroup_log_order(img) == eng.group(1, 1).log_order


def test_truncated_line_log_generated_by_one_unit():
    A = ring("GF(2)[t]/(t^2)")
    lg = drw_log(A, 2, 1)
    one_plus_t = (A.one() + A.gen("t")) % 2
    single = drw_log(A, 2, 1, units=[one_plus_t])
    assert single.group == lg.group
    assert lg.group.order > 1


@pytest.mark.parametrize("text", ["GF(2)[t]/(t^2)", "GF(2)[t]/(t^3)", "GF(3)[t]/(t^2)"])
def test_level_one_log_is_dlog_span(text):
    A = ring(text)
    for n in (1, 2):
        assert drw_log(A, 1, n).group.rank == dlog_span(A, n).dim


@pytest.mark.parametrize("text", ["GF(2)[t]/(t^2)", "GF(2)[t]/(t^3)", "GF(3)[t]/(t^2)",
                                  "GF(2)[x,y]/(x^2,y^2)"])
def test_pi_minus_fbar_level_one_kernel_is_nu(text):
    A = ring(text)
    for m in (0, 1):
        res = pi_Fbar(A, 1, m)
        assert res.well_defined
        assert res.log_in_kernel
        assert res.kernel.order == nu(A, m).group.order


@pytest.mark.parametrize("r", [1, 2])
def test_pi_minus_fbar_prime_field_degree_zero(r):
    res = pi_Fbar(ring("GF(2)"), r, 0)
    assert res.kernel == FiniteAbelianPGroup(2, (2 ** r,))
    assert res.cokernel == FiniteAbelianPGroup(2, (2 ** r,))


def test_telescoping_and_frobenius_image():
    eng = drw_engine(ring("GF(2)[t]/(t^3)"), 3, 2)
    for L in (2, 3):
        for n in (0, 1):
            assert telescoping_identity(eng, L, n).holds
            assert frobenius_image_check(eng, L, n).holds


def test_cap_enforced():
    with pytest.raises(CapExceeded):
        drw_engine(ring("GF(2)"), 50, 1)


def test_generator_labels():
    C = drw_presentation(ring("GF(2)[t]/(t^2)"), 1, 1)
    labels = C.generators()
    assert len(labels) == C.engine.deg[1, 1].cols
    assert any("dt" in s or "d" in s for s in labels)
