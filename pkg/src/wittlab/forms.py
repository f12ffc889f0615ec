"""Kaehler forms of an ArtinAlgebra over F_p, the inverse Cartier operator and nu, nu-tilde.

Omega^n is presented as the free F_p-space on symbols b*dx_J (b an F_p basis
vector of R, J an increasing n-tuple of generator indices) modulo the span of
b*df*dx_J' for f in the Groebner basis of the defining ideal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .algebra import ArtinAlgebra, ideal_power, quotient_by_ideal
from .errors import IdealNotNilpotent, NoSolution, UnitEnumerationTooLarge
from .linalg import (FiniteAbelianPGroup, as_rows, FpLinearMap, KerCoker, Quotient, kernel_cokernel,
                     left_nullspace, rank, row_basis)
from .poly import Poly

UNIT_ENUM_BOUND = 2 ** 16


def wedge_sign(I: tuple, J: tuple):
    """Sign and sorted union of dx_I ^ dx_J, or (0, None) if they overlap."""
    if set(I) & set(J):
        return 0, None
    seq = list(I) + list(J)
    inversions = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return (-1) ** inversions, tuple(sorted(seq))


def _partials(A: ArtinAlgebra) -> list[np.ndarray]:
    """Row k of the i-th matrix is d(basis_k)/dx_i, reduced in R."""
    out = []
    F = A.field
    nv = len(A.generators)
    for i in range(nv):
        D = np.zeros((A.n, A.n), dtype=np.int64)
        for mi, m in enumerate(A.basis):
            dm = Poly(F, nv, {m: 1}).derivative(i)
            for j in range(A.e):
                c = F.pow(F.generator, j) if A.e > 1 else 1
                D[mi * A.e + j] = A.from_poly(dm.scale(c))
        out.append(D)
    return out


class FormSpace:
    """Omega^n_R as an explicit F_p-space."""

    def __init__(self, A: ArtinAlgebra, n: int):
        self.A, self.n, self.p = A, n, A.p
        self.m = len(A.generators)
        self.subsets = list(itertools.combinations(range(self.m), n)) if n >= 0 else []
        self.sub_index = {J: i for i, J in enumerate(self.subsets)}
        self.N = len(self.subsets) * A.n
        self.relations = self._relations()
        self.quotient = Quotient(self.N, self.relations, self.p)
        self.dim = self.quotient.dim

    # ambient coordinates: block J holds the R-coefficient of dx_J
    def index(self, k: int, J: tuple) -> int:
        return self.sub_index[J] * self.A.n + k

    def zero(self) -> np.ndarray:
        return np.zeros(self.N, dtype=np.int64)

    def from_coeffs(self, coeffs: dict) -> np.ndarray:
        v = self.zero()
        n = self.A.n
        for J, a in coeffs.items():
            s = self.sub_index[J]
            v[s * n:(s + 1) * n] = (v[s * n:(s + 1) * n] + np.asarray(a)) % self.p
        return v

    def coeff(self, v, J: tuple) -> np.ndarray:
        s = self.sub_index[J]
        n = self.A.n
        return np.asarray(v)[s * n:(s + 1) * n]

    def blocks(self, v):
        for J in self.subsets:
            c = self.coeff(v, J)
            if c.any():
                yield J, c

    def _relations(self) -> np.ndarray:
        A = self.A
        if self.n < 1 or not self.subsets:
            return np.zeros((0, self.N), dtype=np.int64)
        nv = self.m
        diffs = []
        for f in A.gb:
            df = {(i,): A.from_poly(f.derivative(i)) for i in range(nv)}
            if any(c.any() for c in df.values()):
                diffs.append(df)
        rows = []
        lower = list(itertools.combinations(range(nv), self.n - 1))
        for df in diffs:
            for Jp in lower:
                form = {}
                for (i,), c in df.items():
                    sgn, J = wedge_sign((i,), Jp)
                    if sgn:
                        form[J] = (form.get(J, A.zero()) + sgn * c) % self.p
                base = self.from_coeffs(form)
                for k in range(A.n):
                    rows.append(self.multiply(A.unit_vector(k), base))
        if not rows:
            return np.zeros((0, self.N), dtype=np.int64)
        return row_basis(np.array(rows), self.p)

    def multiply(self, a, v) -> np.ndarray:
        """R-module action a * v on ambient vectors."""
        A = self.A
        L = A.mul_matrix(a)
        out = self.zero()
        n = A.n
        for s in range(len(self.subsets)):
            blk = np.asarray(v)[s * n:(s + 1) * n]
            if blk.any():
                out[s * n:(s + 1) * n] = (blk @ L) % self.p
        return out

    def coords(self, v) -> np.ndarray:
        return self.quotient.coords(v)

    def lift(self, c) -> np.ndarray:
        return self.quotient.lift(c)

    def reduce(self, v) -> np.ndarray:
        return self.quotient.reduce(v)

    def is_zero(self, v) -> bool:
        return self.quotient.contains(v)

    def basis_labels(self) -> list[str]:
        labels = self.A.basis_labels()
        names = self.A.generators
        out = []
        for col in self.quotient.free:
            s, k = divmod(col, self.A.n)
            J = self.subsets[s]
            dx = "^".join(f"d{names[i]}" for i in J)
            out.append(labels[k] if not dx else (dx if labels[k] == "1" else f"{labels[k]}*{dx}"))
        return out

    def format(self, v) -> str:
        red = self.reduce(v)
        parts = []
        names = self.A.generators
        for J, c in self.blocks(red):
            dx = "^".join(f"d{names[i]}" for i in J)
            coef = self.A.format(c)
            if not dx:
                parts.append(coef)
            else:
                parts.append(dx if coef == "1" else f"({coef})*{dx}")
        return " + ".join(parts) if parts else "0"


class DeRhamComplex:
    """All FormSpaces of one algebra with d, wedge and the inverse Cartier operator."""

    def __init__(self, A: ArtinAlgebra):
        self.A, self.p = A, A.p
        self.m = len(A.generators)
        self._spaces: dict = {}
        self._partials = _partials(A)
        self._dmats: dict = {}
        self._closed: dict = {}

    def space(self, n: int) -> FormSpace:
        if n not in self._spaces:
            self._spaces[n] = FormSpace(self.A, n)
        return self._spaces[n]

    # ------------------------------------------------------------ ambient maps
    def d_ambient(self, n: int) -> np.ndarray:
        """Matrix of d on ambient symbols, degree n -> n+1."""
        if n in self._dmats:
            return self._dmats[n]
        src, dst = self.space(n), self.space(n + 1)
        M = np.zeros((src.N, dst.N), dtype=np.int64)
        if dst.N:
            for J in src.subsets:
                for k in range(self.A.n):
                    row = M[src.index(k, J)]
                    for i in range(self.m):
                        sgn, K = wedge_sign((i,), J)
                        if sgn:
                            s = dst.sub_index[K] * self.A.n
                            row[s:s + self.A.n] += sgn * self._partials[i][k]
            M %= self.p
        self._dmats[n] = M
        return M

    def d(self, v, n: int) -> np.ndarray:
        return (np.asarray(v, dtype=np.int64) @ self.d_ambient(n)) % self.p

    def dx(self, i: int) -> np.ndarray:
        sp = self.space(1)
        return sp.from_coeffs({(i,): self.A.one()})

    def d_element(self, a) -> np.ndarray:
        """d of an algebra element as an ambient 1-form."""
        return self.d(np.asarray(a, dtype=np.int64), 0)

    def wedge(self, u, a: int, v, b: int) -> np.ndarray:
        A = self.A
        su, sv, sw = self.space(a), self.space(b), self.space(a + b)
        out = sw.zero()
        if not sw.N:
            return out
        for I, cu in su.blocks(u):
            for J, cv in sv.blocks(v):
                sgn, K = wedge_sign(I, J)
                if sgn:
                    s = sw.sub_index[K] * A.n
                    out[s:s + A.n] = (out[s:s + A.n] + sgn * A.mul(cu, cv)) % self.p
        return out

    def cartier_ambient(self, n: int) -> np.ndarray:
        """b*dx_J -> b^p * x_J^(p-1) * dx_J on ambient symbols."""
        A = self.A
        sp = self.space(n)
        M = np.zeros((sp.N, sp.N), dtype=np.int64)
        for J in sp.subsets:
            xJ = A.one()
            for i in J:
                xJ = A.mul(xJ, A.pow(A.gen(i), self.p - 1))
            s = sp.sub_index[J] * A.n
            for k in range(A.n):
                M[s + k, s:s + A.n] = A.mul(A.frobenius(A.unit_vector(k)), xJ)
        return M

    def closed_quotient(self, n: int) -> Quotient:
        """Omega^n / d Omega^(n-1) as a quotient of the ambient space."""
        if n not in self._closed:
            sp = self.space(n)
            rows = [sp.relations]
            if n >= 1:
                rows.append(self.d_ambient(n - 1))
            sub = np.concatenate([as_rows(r, sp.N) for r in rows], axis=0)
            self._closed[n] = Quotient(sp.N, sub, self.p)
        return self._closed[n]

    # ------------------------------------------------------------ induced maps
    def differential(self, n: int) -> FpLinearMap:
        src, dst = self.space(n), self.space(n + 1)
        lifts = src.lift(np.eye(src.dim, dtype=np.int64)).reshape(src.dim, src.N)
        M = dst.coords(self.d(lifts, n)) if src.dim else np.zeros((0, dst.dim), np.int64)
        return FpLinearMap(self.p, M.reshape(src.dim, dst.dim), src.basis_labels(), dst.basis_labels())

    def one_minus_cartier(self, n: int) -> FpLinearMap:
        src = self.space(n)
        tgt = self.closed_quotient(n)
        lifts = src.lift(np.eye(src.dim, dtype=np.int64)).reshape(src.dim, src.N)
        imgs = (lifts - lifts @ self.cartier_ambient(n)) % self.p
        M = tgt.coords(imgs).reshape(src.dim, tgt.dim)
        return FpLinearMap(self.p, M, src.basis_labels(), list(range(tgt.dim)))


@lru_cache(maxsize=64)
def de_rham(A: ArtinAlgebra) -> DeRhamComplex:
    return DeRhamComplex(A)


def kaehler_space(A: ArtinAlgebra, n: int) -> FormSpace:
    return de_rham(A).space(n)


@dataclass
class CartierMap:
    source: FormSpace
    target: Quotient
    matrix: np.ndarray


def cartier_inverse(space: FormSpace) -> CartierMap:
    """Matrix of C^-1 from Omega^n (quotient coordinates) to Omega^n / d Omega^(n-1)."""
    cx = de_rham(space.A)
    n = space.n
    tgt = cx.closed_quotient(n)
    lifts = space.lift(np.eye(space.dim, dtype=np.int64)).reshape(space.dim, space.N)
    M = tgt.coords((lifts @ cx.cartier_ambient(n)) % space.p).reshape(space.dim, tgt.dim)
    return CartierMap(space, tgt, M)


# ------------------------------------------------------------------ nu and nu-tilde

@dataclass
class NuResult:
    group: FiniteAbelianPGroup
    representatives: np.ndarray          # ambient vectors spanning nu^n
    cokernel: FiniteAbelianPGroup
    cokernel_representatives: np.ndarray  # ambient vectors spanning a complement
    kc: KerCoker = field(repr=False, default=None)


@lru_cache(maxsize=256)
def _nu(A: ArtinAlgebra, n: int) -> NuResult:
    cx = de_rham(A)
    if n < 0:
        triv = FiniteAbelianPGroup(A.p)
        return NuResult(triv, np.zeros((0, 0), np.int64), triv, np.zeros((0, 0), np.int64))
    sp = cx.space(n)
    f = cx.one_minus_cartier(n)
    kc = kernel_cokernel(f)
    reps = sp.lift(kc.kernel_basis).reshape(-1, sp.N) if kc.kernel_basis.size else np.zeros((0, sp.N), np.int64)
    tgt = cx.closed_quotient(n)
    creps = tgt.lift(kc.cokernel_basis).reshape(-1, sp.N) if kc.cokernel_basis.size else np.zeros((0, sp.N), np.int64)
    return NuResult(kc.kernel, reps, kc.cokernel, creps, kc)


def nu(A: ArtinAlgebra, n: int) -> NuResult:
    """nu^n(R) = ker(1 - C^-1 : Omega^n -> Omega^n / d Omega^(n-1)), with the cokernel alongside."""
    return _nu(A, n)


def nu_tilde(A: ArtinAlgebra, n: int) -> FiniteAbelianPGroup:
    return _nu(A, n).cokernel


# ------------------------------------------------------------------ dlog

def unit_generators(A: ArtinAlgebra) -> list[np.ndarray]:
    """Generators of 1 + m for a local algebra: 1 + b for b in bases of the powers of m."""
    if not A.local:
        raise UnitEnumerationTooLarge("structural unit generators need a local algebra")
    gens = []
    seen = set()
    s = 1
    while True:
        P = ideal_power(A, A.maximal_ideal, s)
        if P.shape[0] == 0:
            break
        for b in P:
            k = A.key(b)
            if k not in seen:
                seen.add(k)
                gens.append((A.one() + b) % A.p)
        s += 1
    return gens


def dlog(A: ArtinAlgebra, u) -> np.ndarray:
    """u^-1 du as an ambient 1-form."""
    cx = de_rham(A)
    return cx.space(1).multiply(A.inverse(u), cx.d_element(u))


def _closure(A: ArtinAlgebra, gens, depth: int = 3):
    out = {A.key(g): g for g in gens}
    layer = list(out.values())
    for _ in range(depth - 1):
        new = []
        for a in layer:
            for b in gens:
                c = A.mul(a, b)
                k = A.key(c)
                if k not in out:
                    out[k] = c
                    new.append(c)
        layer = new
    return list(out.values())


@dataclass
class DlogSpan:
    n: int
    generators: np.ndarray     # ambient n-forms spanning the dlog span
    dim: int
    group: FiniteAbelianPGroup
    units_used: str            # "enumerated", "structural" or "supplied"
    contained_in_nu: bool
    equals_nu: bool


def dlog_units(A: ArtinAlgebra, units=None):
    if units is not None:
        return _closure(A, [np.asarray(u, dtype=np.int64) % A.p for u in units]), "supplied"
    count = A.unit_count() if A.local else None
    if count is not None and count <= UNIT_ENUM_BOUND and A.order <= A.enum_bound:
        return A.units(), "enumerated"
    if A.local:
        return unit_generators(A), "structural"
    if A.order <= min(A.enum_bound, UNIT_ENUM_BOUND):
        return A.units(), "enumerated"
    raise UnitEnumerationTooLarge("too many units to enumerate; supply unit generators",
                                  order=A.order)


def dlog_span(A: ArtinAlgebra, n: int, units=None) -> DlogSpan:
    cx = de_rham(A)
    p = A.p
    sp = cx.space(n)
    if n == 0:
        gens = sp.from_coeffs({(): A.one()}).reshape(1, -1)
        how = "empty wedge"
    else:
        us, how = dlog_units(A, units)
        one_forms = [dlog(A, u) for u in us]
        s1 = cx.space(1)
        cs = as_rows(np.array([s1.coords(w) for w in one_forms]), s1.dim)
        basis = row_basis(cs, p) if cs.size else np.zeros((0, s1.dim), np.int64)
        basis_forms = [s1.lift(b) for b in basis]
        gens = []
        for combo in itertools.combinations(range(len(basis_forms)), n):
            w = basis_forms[combo[0]]
            for deg, j in enumerate(combo[1:], start=1):
                w = cx.wedge(w, deg, basis_forms[j], 1)
            gens.append(w)
        gens = as_rows(np.array(gens, dtype=np.int64), sp.N)
    coords = as_rows(sp.coords(gens), sp.dim)
    dim = rank(coords, p) if coords.size else 0
    nres = nu(A, n)
    nu_coords = as_rows(sp.coords(nres.representatives), sp.dim)
    both = np.concatenate([nu_coords, coords], axis=0)
    rk_both = rank(both, p) if both.size else 0
    contained = rk_both == nres.group.rank
    return DlogSpan(n, gens, dim, FiniteAbelianPGroup.elementary(p, dim), how,
                    contained, contained and dim == nres.group.rank)


# ------------------------------------------------------------------ Artin-Schreier

def artin_schreier_solve(A: ArtinAlgebra, c, target) -> np.ndarray:
    """A solution u of u - u^p * c = target."""
    c = np.asarray(c, dtype=np.int64) % A.p
    target = np.asarray(target, dtype=np.int64) % A.p
    if A.is_nilpotent(c):
        u = target
        for _ in range(A.dim + 2):
            nxt = (target + A.mul(A.frobenius(u), c)) % A.p
            if (nxt == u).all():
                return u
            u = nxt
        raise AssertionError("fixed-point iteration did not settle")
    for u in A.elements():
        if ((u - A.mul(A.frobenius(u), c) - target) % A.p == 0).all():
            return u
    raise NoSolution("u - u^p c = target has no solution",
                     c=A.format(c), target=A.format(target))


# ------------------------------------------------------------------ rigidity

@dataclass
class RigidityReport:
    nu_surjective: bool
    nu_tilde_iso: bool
    v0_to_v1_surjective: bool
    witnesses: dict

    def as_dict(self) -> dict:
        return {"nu_surjective": self.nu_surjective, "nu_tilde_iso": self.nu_tilde_iso,
                "v0_to_v1_surjective": self.v0_to_v1_surjective, "witnesses": self.witnesses}


def induced_form_map(A: ArtinAlgebra, Q: ArtinAlgebra, S: np.ndarray, n: int) -> np.ndarray:
    """Ambient matrix Omega^n_R -> Omega^n_Q induced by the algebra surjection S."""
    sa, sq = kaehler_space(A, n), kaehler_space(Q, n)
    M = np.zeros((sa.N, sq.N), dtype=np.int64)
    for J in sa.subsets:
        a0, q0 = sa.sub_index[J] * A.n, sq.sub_index[J] * Q.n
        M[a0:a0 + A.n, q0:q0 + Q.n] = S
    return M


def rigidity_check(A: ArtinAlgebra, ideal_gens, n: int) -> RigidityReport:
    """Compare nu^n and nu-tilde^n of R and R/I through the relative-form diagram."""
    p = A.p
    I = A.ideal(ideal_gens) if len(ideal_gens) else np.zeros((0, A.n), np.int64)
    for v in I:
        if not A.is_nilpotent(v):
            raise IdealNotNilpotent(f"{A.format(v)} is not nilpotent")
    if I.shape[0] == 0:
        return RigidityReport(True, True, True, {"trivial_ideal": True})
    Q, S = quotient_by_ideal(A, I)
    cxA, cxQ = de_rham(A), de_rham(Q)
    sa, sq = cxA.space(n), cxQ.space(n)
    M = induced_form_map(A, Q, S, n)
    na, nq = nu(A, n), nu(Q, n)
    # nu(R) -> nu(Q)
    img = as_rows(sq.coords((na.representatives @ M) % p), sq.dim)
    nq_coords = as_rows(sq.coords(nq.representatives), sq.dim)
    r_img = rank(img, p) if img.size else 0
    r_all = rank(np.concatenate([img, nq_coords]), p) if (img.size or nq_coords.size) else 0
    nu_surj = r_img == nq.group.rank == r_all
    # nu~(R) -> nu~(Q): cokernel representatives pushed to Omega_Q / d, modulo im(1 - C^-1)
    tq = cxQ.closed_quotient(n)
    fq = cxQ.one_minus_cartier(n).matrix
    coker_q = Quotient(tq.dim, fq, p)
    ca = na.cokernel_representatives
    cimg = as_rows(coker_q.coords(tq.coords((ca @ M) % p)), coker_q.dim)
    r_c = rank(cimg, p) if cimg.size else 0
    tilde_iso = na.cokernel.rank == nq.cokernel.rank == r_c
    # auxiliary: V0 -> V1 is surjective
    v0 = _kernel_ambient(sa, sq, M, p)
    ta = cxA.closed_quotient(n)
    ind_closed = tq.coords((ta.lift(np.eye(ta.dim, dtype=np.int64)) @ M) % p).reshape(ta.dim, tq.dim)
    v1 = left_nullspace(ind_closed, p) if ta.dim else np.zeros((0, 0), np.int64)
    C = cxA.cartier_ambient(n)
    v0_img = as_rows(ta.coords((v0 - v0 @ C) % p), ta.dim)
    r_v1 = v1.shape[0]
    r_v0img = rank(v0_img, p) if v0_img.size else 0
    r_join = rank(np.concatenate([v0_img, as_rows(v1, ta.dim)]), p) if (v0_img.size or v1.size) else 0
    v_surj = r_v0img == r_v1 == r_join
    witnesses = {
        "nu_R": na.group.to_list(),
        "nu_R_mod_I": nq.group.to_list(),
        "nu_tilde_R": na.cokernel.to_list(),
        "nu_tilde_R_mod_I": nq.cokernel.to_list(),
        "image_rank": r_img,
        "V1_dim": r_v1,
        "image_of_V0_rank": r_v0img,
    }
    return RigidityReport(nu_surj, tilde_iso, v_surj, witnesses)


def _kernel_ambient(sa: FormSpace, sq: FormSpace, M, p) -> np.ndarray:
    """Ambient representatives of ker(Omega^n_R -> Omega^n_Q)."""
    lifts = sa.lift(np.eye(sa.dim, dtype=np.int64)).reshape(sa.dim, sa.N)
    img = sq.coords((lifts @ M) % p).reshape(sa.dim, sq.dim)
    ker = left_nullspace(img, p) if sa.dim else np.zeros((0, 0), np.int64)
    return (as_rows(ker, sa.dim) @ lifts) % p
