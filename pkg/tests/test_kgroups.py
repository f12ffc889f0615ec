import pytest

from wittlab import ring
from wittlab.errors import GuardError, NotPerfect, NotSmoothGuard
from wittlab.kgroups import (SmoothnessTag, k_mod_p_local_smooth, kinv_mod_p, ktc_report, pro_gl,
                             tc_mod_p_pieces, tc_perfect, tc_pi_mod_p_via_drw, tr_homotopy_ring,
                             unit_tower_kills_torsion)
from wittlab.prosys import INCONCLUSIVE, NOT_PRO_ZERO, PRO_ZERO


@pytest.mark.parametrize("text", ["GF(2)", "GF(4)", "GF(3)", "GF(9)"])
def test_k_of_finite_fields(text):
    A = ring(text)
    assert k_mod_p_local_smooth(A, 0).invariant_factors == (A.p,)
    for n in (1, 2):
        assert k_mod_p_local_smooth(A, n).order == 1
    assert k_mod_p_local_smooth(A, 0, r=2).invariant_factors == (A.p ** 2,)


def test_not_smooth_is_refused():
    A = ring("GF(2)[t]/(t^2)")
    with pytest.raises(NotSmoothGuard):
        k_mod_p_local_smooth(A, 1)
    with pytest.raises(NotSmoothGuard):
        kinv_mod_p(A, 0)
    # an explicit assertion of smoothness is honoured
    assert SmoothnessTag.derive(A, assert_smooth=True).smooth


def test_tc_pieces_prime_field():
    sub, quo = tc_mod_p_pieces(ring("GF(2)"), 0)
    assert sub.order == 1 and quo.invariant_factors == (2,)
    with pytest.raises(GuardError):
        tc_mod_p_pieces(ring("GF(2)"), -1)
    sub, quo = tc_mod_p_pieces(ring("GF(4)"), 1)
    assert sub.order == 1 and quo.order == 1


@pytest.mark.parametrize("text", ["GF(2)", "GF(4)"])
def test_kinv_degree_minus_two(text):
    assert kinv_mod_p(ring(text), -2).invariant_factors == (2,)


def test_kinv_below_range_is_zero():
    assert kinv_mod_p(ring("GF(2)"), -3).order == 1


def test_ktc_report():
    rep = ktc_report(ring("GF(3)"), 0)
    assert rep.K == [3] and rep.tc_order == 3
    assert rep.checks["tc_order_is_product"]
    assert "unresolved" in rep.provenance["TC"]


@pytest.mark.parametrize("text,r", [("GF(2)", 1), ("GF(2)", 3), ("GF(3)", 2), ("GF(4)", 2)])
def test_tc_perfect(text, r):
    A = ring(text)
    rep = tc_perfect(A, r)
    assert rep.pi0.invariant_factors == (A.p ** r,)
    assert rep.pi_minus1.invariant_factors == (A.p ** r,)
    assert "xσ - p" in str(rep.tc_minus_ring)


def test_tc_perfect_refuses_non_perfect():
    with pytest.raises(NotPerfect):
        tc_perfect(ring("GF(2)[t]/(t^2)"), 1)


def test_tr_ring_prime_field():
    pres = tr_homotopy_ring(ring("GF(2)"), 1)
    assert str(pres) == "F_2[σ_1]"
    # one copy of F_2 in every even degree, nothing in odd degrees
    assert pres.pieces[0].order == 2 and pres.pieces[2].order == 2
    assert pres.pieces[1].order == 1 and pres.pieces[3].order == 1


def test_tr_ring_higher_level():
    pres = tr_homotopy_ring(ring("GF(2)"), 2)
    assert pres.pieces[2].invariant_factors == (4,)


def test_tc_tower_prime_field():
    rep = tc_pi_mod_p_via_drw(ring("GF(2)"), 0, levels=[2, 3, 4])
    assert [g.invariant_factors for g in rep.ker_pieces] == [(2,)] * 3
    assert all(g.order == 1 for g in rep.coker_pieces)
    assert rep.ker_verdicts["quickly_converging"] != INCONCLUSIVE


def test_tc_tower_low_degrees_vanish():
    rep = tc_pi_mod_p_via_drw(ring("GF(2)"), -2, levels=[2, 3])
    assert all(g.order == 1 for g in rep.ker_pieces + rep.coker_pieces)


def test_unit_tower_kills_torsion_by_enumeration():
    for s in range(1, 5):
        assert unit_tower_kills_torsion("GF(2)[t]", "t", s)


def test_pro_gl_degree_zero_constant():
    rep = pro_gl("GF(2)[t]", "t", 0, 1, 4)
    assert all(g.invariant_factors == (2,) for g in rep.stages)
    assert all(rep.transitions_surjective)


def test_pro_gl_degree_one():
    rep = pro_gl("GF(2)[t]", "t", 1, 2, 4)
    assert rep.checks["b_milnor_symbols_exhaust"]
    assert rep.checks["a_unit_tower_kills_p_torsion"]
    assert rep.checks["c_middle_exact"]
    assert rep.checks["c_restriction_onto"]
    assert rep.checks["c_left_injective"] in (PRO_ZERO, INCONCLUSIVE)
    assert rep.checks["c_left_injective"] != NOT_PRO_ZERO
