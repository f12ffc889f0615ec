"""Acceptance criteria 1-12.

Each test records a one-line verdict in RESULTS; the terminal summary hook in
conftest.py prints them as ``criterion N: PASS|FAIL  detail``.  Running this
file directly prints the same lines.
"""

import itertools
import os
import subprocess
import sys
import tempfile

import numpy as np
import pytest

from corpus import local_ring_corpus
from wittlab import ring
from wittlab.cli import _ideal_rows
from wittlab.drw import drw_engine, level_one_matches_forms, pi_Fbar, verify_identities
from wittlab.forms import de_rham, kaehler_space, nu, rigidity_check
from wittlab.hensel import RingPolynomial, hensel_lift, solve_special
from wittlab.kgroups import k_mod_p_local_smooth, pro_gl, tc_perfect
from wittlab.linalg import FiniteAbelianPGroup
from wittlab.prosys import (NOT_PRO_ZERO, PRO_ZERO, is_mittag_leffler_within,
                            is_pro_zero_within, is_quickly_converging_within,
                            multiplication_tower, random_tower)
from wittlab.discont import bek_family
from wittlab.witt import WittVector, all_witt_vectors, ker_coker_F_minus_1, \
    ker_coker_F_minus_1_enumerated

from test_witt import sympy_ghost_check

RESULTS: dict[int, tuple[bool, str]] = {}

SUITE = ["GF(2)", "GF(4)", "GF(2)[t]/(t^2)", "GF(2)[t]/(t^3)", "GF(3)[t]/(t^2)"]


def record(n: int, ok: bool, detail: str):
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


def report_lines() -> list[str]:
    return [f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
            for n, (ok, detail) in sorted(RESULTS.items())]


# 1 ----------------------------------------------------------------------------

def test_criterion_01_witt_ghost_and_z4():
    bad = [(p, r, k) for p, r in [(2, 2), (2, 3), (3, 2), (3, 3), (5, 2)]
           for k in ("sum", "prod") if not sympy_ghost_check(p, r, k)]
    A = ring("GF(2)")
    elems = list(all_witt_vectors(A, 2))

    def z4(v: WittVector) -> int:
        return (int(v.coords[0][0]) + 2 * int(v.coords[1][0])) % 4
    table_bad = sum(1 for x, y in itertools.product(elems, repeat=2)
                    if z4(x + y) != (z4(x) + z4(y)) % 4 or z4(x * y) != z4(x) * z4(y) % 4)
    record(1, not bad and table_bad == 0 and len(elems) == 4,
           f"ghost failures {bad}, Z/4 table mismatches {table_bad}/16")


# 2 ----------------------------------------------------------------------------

def test_criterion_02_operator_identities():
    summary, failures = [], []
    for text in SUITE:
        eng = drw_engine(ring(text), 3, 2)
        checks = verify_identities(eng, 3, 2)
        n_checked = sum(c.checked for c in checks.values())
        n_fail = sum(len(c.failures) for c in checks.values())
        summary.append(f"{text}:{n_checked}")
        if n_fail:
            failures.append((text, {k: len(c.failures) for k, c in checks.items() if c.failures}))
    record(2, not failures, f"checks per ring {summary}; failures {failures}")


# 3 ----------------------------------------------------------------------------

LEVEL_ONE_SUITE = SUITE + ["GF(3)[t]/(t^3)", "GF(2)[x,y]/(x^2,y^2)", "GF(4)[t]/(t^2)"]


def test_criterion_03_level_one_collapse():
    bad = []
    for text in LEVEL_ONE_SUITE:
        A = ring(text)
        eng = drw_engine(A, 1, 3)
        cx = de_rham(A)
        for n in range(3):
            ok = level_one_matches_forms(eng, n)
            ok = ok and eng.group(1, n).order == A.p ** kaehler_space(A, n).dim
            if ok:
                dmat = cx.d_ambient(n)
                for i, e in enumerate(eng.symbols(1, n)):
                    if not eng.is_zero(1, n + 1, (eng.d(1, n, e) - dmat[i]) % A.p):
                        ok = False
                        break
            if not ok:
                bad.append((text, n))
    record(3, not bad, f"{len(LEVEL_ONE_SUITE)} rings, n <= 2; mismatches {bad}")


# 4 ----------------------------------------------------------------------------

def test_criterion_04_perfect_rings():
    bad = []
    for text in ["GF(2)", "GF(4)", "GF(8)", "GF(9)"]:
        A = ring(text)
        eng = drw_engine(A, 3, 2)
        for r in (1, 2, 3):
            if any(eng.group(r, n).order != 1 for n in (1, 2)):
                bad.append((text, r, "forms"))
            rep = tc_perfect(A, r)
            want = FiniteAbelianPGroup(A.p, (A.p ** r,))
            if rep.pi0 != want or rep.pi_minus1 != want:
                bad.append((text, r, "tc"))
            if ker_coker_F_minus_1(A, r) != ker_coker_F_minus_1_enumerated(A, r):
                bad.append((text, r, "enumeration"))
    record(4, not bad, f"F_2, F_4, F_8, F_9 at r <= 3; failures {bad}")


# 5 ----------------------------------------------------------------------------

def test_criterion_05_rigidity_corpus():
    rings = checks = 0
    bad = []
    for text, ideals in local_ring_corpus():
        A = ring(text)
        if not A.local or A.dim > 12:
            continue
        rings += 1
        for I in ideals:
            rows = _ideal_rows(A, I)
            for n in range(3):
                rep = rigidity_check(A, rows, n)
                checks += 1
                if not (rep.nu_surjective and rep.nu_tilde_iso):
                    bad.append((text, I, n))
    record(5, rings >= 50 and not bad, f"{rings} rings, {checks} checks, failures {bad[:5]}")


# 6 ----------------------------------------------------------------------------

def test_criterion_06_geisser_levine_fields():
    bad = []
    for q in (2, 4, 8, 3, 9):
        A = ring(f"GF({q})")
        if k_mod_p_local_smooth(A, 0).invariant_factors != (A.p,):
            bad.append((q, 0))
        for n in (1, 2, 3):
            if k_mod_p_local_smooth(A, n).order != 1:
                bad.append((q, n))
    record(6, not bad, f"q in 2,4,8,3,9; failures {bad}")


# 7 ----------------------------------------------------------------------------

def test_criterion_07_pro_geisser_levine_window():
    needed = ("b_milnor_symbols_exhaust", "a_unit_tower_kills_p_torsion",
              "c_middle_exact", "c_restriction_onto")
    bad, verdicts = [], {}
    for n in (0, 1):
        for r in (1, 2):
            rep = pro_gl("GF(2)[t]", "t", n, r, 6)
            for key in needed:
                if rep.checks.get(key) is not True:
                    bad.append((n, r, key))
            left = rep.checks.get("c_left_injective")
            verdicts[(n, r)] = left
            if left == NOT_PRO_ZERO:
                bad.append((n, r, "c_left_injective"))
    shown = ", ".join(f"n={n},r={r}: {v}" for (n, r), v in sorted(verdicts.items()))
    record(7, not bad, f"window 6; failures {bad}; left injectivity verdicts [{shown}]")


# 8 ----------------------------------------------------------------------------

def test_criterion_08_pi_minus_fbar():
    bad = []
    for text in SUITE:
        A = ring(text)
        for m in (0, 1):
            r1 = pi_Fbar(A, 1, m)
            if r1.kernel.order != nu(A, m).group.order or not r1.well_defined:
                bad.append((text, m, "r=1 kernel"))
            r2 = pi_Fbar(A, 2, m)
            if not r2.log_in_kernel:
                bad.append((text, m, "r=2 log"))
    for p in (2, 3):
        for r in (1, 2, 3):
            res = pi_Fbar(ring(f"GF({p})"), r, 0)
            if res.cokernel != FiniteAbelianPGroup(p, (p ** r,)):
                bad.append((p, r, "coker"))
    record(8, not bad, f"{len(SUITE)} rings, m <= 1; failures {bad}")


# 9 ----------------------------------------------------------------------------

HENSEL_RINGS = ["GF(2)[t]/(t^3)", "GF(2)[t]/(t^4)", "GF(2)[t]/(t^5)", "GF(3)[t]/(t^3)",
                "GF(3)[t]/(t^4)", "GF(2)[x,y]/(x^2,y^2)", "GF(4)[t]/(t^3)"]


def _roots_near(A, elems, f, a0):
    """Independent oracle: every root congruent to a0, by enumeration."""
    return [a for a in elems if A.in_maximal_ideal(A.sub(a, a0)) and not f(a).any()]


def test_criterion_09_hensel_suite():
    rng = np.random.default_rng(9)
    rings = {t: ring(t) for t in HENSEL_RINGS}
    elements = {t: list(A.elements()) for t, A in rings.items()}
    done = bad = 0
    while done < 100:
        text = HENSEL_RINGS[int(rng.integers(len(HENSEL_RINGS)))]
        A, elems = rings[text], elements[text]
        deg = int(rng.integers(1, 4))
        coeffs = [rng.integers(0, A.p, A.n) for _ in range(deg + 1)]
        a0 = elems[int(rng.integers(len(elems)))]
        f = RingPolynomial(A, coeffs)
        if not A.is_unit(f.derivative()(a0)):
            continue
        # move the constant term so that f(a0) lies in the maximal ideal
        m_elem = A.mul(A.gen(0), rng.integers(0, A.p, A.n))
        coeffs[0] = A.add(A.sub(coeffs[0], f(a0)), m_elem)
        f = RingPolynomial(A, coeffs)
        res = hensel_lift(A, f, a0)
        roots = _roots_near(A, elems, f, a0)
        if len(roots) != 1 or not np.array_equal(roots[0], res.root):
            bad += 1
        done += 1
    special_bad = 0
    for text in ("GF(2)[t]/(t^5)", "GF(3)[t]/(t^4)"):
        A = rings.get(text) or ring(text)
        for s in A.elements():
            if not A.in_maximal_ideal(s):
                continue
            for n in (1, 2, 3):
                x = solve_special(A, s, n)
                if not np.array_equal(A.sub(x, A.mul(s, A.pow(x, n))), A.one()):
                    special_bad += 1
    record(9, bad == 0 and special_bad == 0,
           f"{done} random lifts, enumeration mismatches {bad}; solve_special failures {special_bad}")


# 10 ---------------------------------------------------------------------------

def test_criterion_10_discontinuity():
    rep = bek_family(2, (1, 2, 3), 4)
    cong = [s.congruence_holds for s in rep.stages]
    rel = [s.relative_weight_bound for s in rep.stages]
    ab = [s.absolute_weight_bound for s in rep.stages]
    record(10, cong == [True] * 3 and rel == [1, 2, 3],
           f"congruences {cong}; relative weight bounds {rel}; absolute {ab}")


# 11 ---------------------------------------------------------------------------

def test_criterion_11_tower_detectors():
    rng = np.random.default_rng(0)
    counts = {"pro_zero": 0, "ml": 0, "qc": 0}
    broken = {"pz=>ml": 0, "ml=>qc": 0, "pz=>qc": 0}
    for _ in range(200):
        T = random_tower(int(rng.choice([2, 3])), int(rng.integers(2, 9)), rng)
        pz = is_pro_zero_within(T).positive
        ml = is_mittag_leffler_within(T).positive
        qc = is_quickly_converging_within(T).positive
        counts["pro_zero"] += pz
        counts["ml"] += ml
        counts["qc"] += qc
        broken["pz=>ml"] += pz and not ml
        broken["ml=>qc"] += ml and not qc
        broken["pz=>qc"] += pz and not qc
    strides = {}
    for p in (2, 3):
        for e in (1, 2, 3):
            v = is_pro_zero_within(multiplication_tower(p, e, 8))
            strides[(p, e)] = v.stride if v.verdict == PRO_ZERO else None
    stride_ok = all(strides[(p, e)] == e for p, e in strides)
    record(11, stride_ok and not any(broken.values()),
           f"positives {counts}; implication violations {broken}; "
           f"multiplication strides ok={stride_ok}")


# 12 ---------------------------------------------------------------------------

CLI_JOBS = """\
nu --ring GF(2)[t]/(t^3) --degree 1
nutilde --ring GF(3)[t]/(t^3) --degree 1
dlog --ring GF(2)[t]/(t^3) --degree 1
drw --ring GF(2)[t]/(t^2) --r 2 --degree 1 --identities
drw-log --ring GF(2)[t]/(t^3) --r 2 --degree 1
pi-fbar --ring GF(2)[t]/(t^2) --r 1 --degree 1
witt --p 3 --r 2
tc-perfect --ring GF(9) --r 2
tr-ring --ring GF(2) --s 2
k-smooth --ring GF(8) --degree 1
pro-gl --ring GF(2)[t] --ideal t --degree 1 --window 4
rigidity --ring GF(2)[t]/(t^4) --ideal t^2 --degree 1
hensel --ring GF(2)[t]/(t^4) --poly x^2+x+t --alpha0 0
tower --p 2 --example multiplication --e 2 --window 6
dieudonne --p 2 --precision 4
discont --weights 1,2 --stage 3
nu --ring GF(6)[t] --degree 1
"""


def test_criterion_12_determinism(tmp_path):
    batch = tmp_path / "jobs.txt"
    batch.write_text(CLI_JOBS)
    env = dict(os.environ, WITTLAB_CACHE=tempfile.mkdtemp(prefix="wittlab-det-"))
    outs = []
    for _ in range(2):
        res = subprocess.run([sys.executable, "-m", "wittlab.cli", "--batch", str(batch)],
                             capture_output=True, env=env, timeout=600)
        outs.append(res.stdout)
    n_jobs = len(CLI_JOBS.strip().splitlines())
    record(12, outs[0] == outs[1] and len(outs[0]) > 0,
           f"{n_jobs} CLI jobs run twice (cold and warm cache), {len(outs[0])} bytes, "
           f"identical={outs[0] == outs[1]}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
