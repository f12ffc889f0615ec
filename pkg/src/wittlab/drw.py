"""Truncated de Rham-Witt groups W_L Omega^n_R by relation saturation.

W_L Omega^n is presented as a quotient of Omega^n of W_L(R) over Z.  The
ambient group at level L and degree n is free over Z/p^L on symbols g*dy_J:

* g runs over the additive generators V^i[b] of W_L(R) (b in the F_p basis of R),
* J is an increasing n-tuple from the ring generators Y_L, namely the
  Teichmueller lifts [x_j] and the V^i[m] for 1 <= i < L and m a standard
  monomial other than 1.

Relations are seeded by the Witt-vector group law, the Leibniz rule, the
projection formula V(a F(w)) = V(a) w on d[x_j] and the Teichmueller rule
F d[a] = [a]^(p-1) d[a], then closed under multiplication by ring generators,
under wedge with dy and under d, and pushed between levels by F, V and
restriction until nothing new appears.  Levels above the requested one
(``headroom``) only feed relations downwards.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .algebra import ArtinAlgebra
from .errors import (CapExceeded, IllDefinedOperator, LiftFailure, OracleMismatch,
                     SaturationBudgetExceeded)
from .linalg import FiniteAbelianPGroup, PresentedGroup, as_rows, hom_kernel
from .witt import length_cap, witt_digits

DEFAULT_BUDGET = 2_000_000
TEICH_RULE_FULL_BOUND = 4096
TEICH_RULE_SAMPLE = 512


def _inv_frobenius_power(F, c: int, i: int) -> int:
    """c^(1/p^i) in F_q."""
    if F.e == 1 or c in (0, 1):
        return c
    k = (-i) % F.e
    return F.pow(c, F.p ** k)


class LevelData:
    """Witt digits, ring generators, product table and d at one level."""

    def __init__(self, A: ArtinAlgebra, L: int):
        self.A, self.L, self.p = A, L, A.p
        self.mod = A.p ** L
        self.wd = witt_digits(A, L)
        self.G = self.wd.size
        names = A.generators
        self.Y = []          # ("T", j) or ("V", i, monomial index)
        self.labels = []
        for j, nm in enumerate(names):
            self.Y.append(("T", j))
            self.labels.append(f"[{nm}]")
        for i in range(1, L):
            for mi, m in enumerate(A.basis):
                if sum(m) == 0:
                    continue
                self.Y.append(("V", i, mi))
                mono = A.basis_labels()[mi * A.e]
                self.labels.append(f"V^{i}[{mono}]")
        self.ny = len(self.Y)
        self.yindex = {y: k for k, y in enumerate(self.Y)}
        self.gen_elems = [A.gen(j) for j in range(len(names))]
        self._mult_table()
        self._d_table()
        self.one = self.teich(A.one())

    # -------------------------------------------------------------- digits
    def teich(self, a) -> np.ndarray:
        return self.wd.teichmuller_digits(np.asarray(a, dtype=np.int64) % self.p).copy()

    def vteich(self, i: int, a) -> np.ndarray:
        return self.wd.v_teich_digits(i, np.asarray(a, dtype=np.int64) % self.p).copy()

    def gen_split(self, g: int):
        level, k = divmod(g, self.A.n)
        return level, k

    def y_digits(self, y) -> np.ndarray:
        A = self.A
        if y[0] == "T":
            return self.teich(self.gen_elems[y[1]])
        _, i, mi = y
        out = np.zeros(self.G, dtype=np.int64)
        out[i * A.n + mi * A.e] = 1
        return out

    def _mult_table(self):
        A, G, n = self.A, self.G, self.A.n
        T = np.zeros((G, G, G), dtype=np.int64)
        for g in range(G):
            i, k = divmod(g, n)
            b = A.unit_vector(k)
            for h in range(g, G):
                j, l = divmod(h, n)
                if i + j >= self.L:
                    continue
                c = A.unit_vector(l)
                prod = A.mul(A.pow(b, self.p ** j), A.pow(c, self.p ** i))
                T[g, h] = T[h, g] = self.vteich(i + j, prod)
        self.mult = T

    def coeff_matrix(self, c) -> np.ndarray:
        """Row h is (c * generator h) as digits."""
        return np.tensordot(np.asarray(c, dtype=np.int64), self.mult, axes=(0, 0)) % self.mod

    def coeff_mul(self, a, b) -> np.ndarray:
        return (np.asarray(b, dtype=np.int64) @ self.coeff_matrix(a)) % self.mod

    def _d_table(self):
        """D[g] is d(generator g) as a (ny, G) array of coefficients on dy."""
        A, F = self.A, self.A.field
        n, e = A.n, A.e
        D = np.zeros((self.G, self.ny, self.G), dtype=np.int64)
        for g in range(self.G):
            i, k = divmod(g, n)
            mi, a = divmod(k, e)
            m = A.basis[mi]
            if sum(m) == 0:
                continue
            c = F.pow(F.generator, a) if e > 1 else 1
            if i == 0:
                from .poly import Poly
                for j, ex in enumerate(m):
                    if ex % self.p == 0:
                        continue
                    mm = list(m)
                    mm[j] -= 1
                    elem = A.from_poly(Poly(F, len(m), {tuple(mm): c}))
                    D[g, self.yindex[("T", j)]] += (ex % self.mod) * self.teich(elem)
            else:
                cc = _inv_frobenius_power(F, c, i)
                D[g, self.yindex[("V", i, mi)]] += self.teich(A.scalar(cc))
        self.D = D % self.mod

    def D_of(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c, dtype=np.int64), self.D, axes=(0, 0)) % self.mod


class DegreeData:
    """Index bookkeeping for degree-n symbols at one level."""

    def __init__(self, lv: LevelData, n: int):
        self.n = n
        self.G = lv.G
        self.subsets = list(itertools.combinations(range(lv.ny), n)) if n >= 0 else []
        self.index = {J: k for k, J in enumerate(self.subsets)}
        self.nJ = len(self.subsets)
        self.cols = self.nJ * lv.G


class DRWEngine:
    """Saturated presentations for levels 1..top and degrees 0..nmax."""

    def __init__(self, A: ArtinAlgebra, top: int, nmax: int, requested: int | None = None,
                 budget: int = DEFAULT_BUDGET, teich_sample_seed: int = 0):
        cap = length_cap(A.p)
        if top > cap:
            raise CapExceeded(f"level {top} exceeds the Witt length cap {cap}", level=top)
        self.A, self.p, self.top, self.nmax = A, A.p, top, nmax
        self.requested = requested if requested is not None else top
        self.budget = budget
        self.levels = {L: LevelData(A, L) for L in range(1, top + 1)}
        self._next_level = None
        self.deg = {(L, n): DegreeData(self.levels[L], n)
                    for L in range(1, top + 1) for n in range(0, nmax + 2)}
        self.groups = {(L, n): PresentedGroup(self.p, L, self.deg[L, n].cols)
                       for L in range(1, top + 1) for n in range(0, nmax + 1)}
        self._F, self._V, self._R = {}, {}, {}
        self._wedge_maps = {}
        self._d_maps = {}
        self.transcript = {"seeds": {}, "pushes": {}, "insertions": 0, "growth": 0,
                           "teichmuller_rule": ""}
        self._saturate(teich_sample_seed)

    # -------------------------------------------------------------- structural maps
    def ring_generators(self, L: int) -> list[np.ndarray]:
        lv = self.levels[L]
        out = [lv.coeff_matrix(lv.y_digits(y)) for y in lv.Y]
        F = self.A.field
        if F.e > 1:
            out.append(lv.coeff_matrix(lv.teich(self.A.scalar(F.generator))))
        return out

    def _wedge_map(self, L: int, n: int, y: int):
        key = (L, n, y)
        if key not in self._wedge_maps:
            src, dst = self.deg[L, n], self.deg[L, n + 1]
            rows = []
            for J, k in src.index.items():
                if y in J:
                    continue
                K = tuple(sorted(J + (y,)))
                sign = (-1) ** sum(1 for x in J if x < y)
                rows.append((k, dst.index[K], sign))
            arr = np.array(rows, dtype=np.int64).reshape(-1, 3)
            self._wedge_maps[key] = arr
        return self._wedge_maps[key]

    def wedge_dy(self, L: int, n: int, u, y: int) -> np.ndarray:
        """dy ^ u (dy placed on the left)."""
        src, dst = self.deg[L, n], self.deg[L, n + 1]
        U = np.asarray(u, dtype=np.int64).reshape(src.nJ, src.G)
        out = np.zeros((dst.nJ, dst.G), dtype=np.int64)
        m = self._wedge_map(L, n, y)
        if m.shape[0]:
            np.add.at(out, m[:, 1], m[:, 2:3] * U[m[:, 0]])
        return out.reshape(-1) % self.levels[L].mod

    def _d_map(self, L: int, n: int):
        key = (L, n)
        if key not in self._d_maps:
            src, dst = self.deg[L, n], self.deg[L, n + 1]
            rows = []
            ny = self.levels[L].ny
            for J, k in src.index.items():
                for y in range(ny):
                    if y in J:
                        continue
                    K = tuple(sorted(J + (y,)))
                    sign = (-1) ** sum(1 for x in J if x < y)
                    rows.append((k, y, dst.index[K], sign))
            self._d_maps[key] = np.array(rows, dtype=np.int64).reshape(-1, 4)
        return self._d_maps[key]

    def d(self, L: int, n: int, u) -> np.ndarray:
        """d(a dy_J) = d(a) ^ dy_J."""
        lv = self.levels[L]
        src, dst = self.deg[L, n], self.deg[L, n + 1]
        U = np.asarray(u, dtype=np.int64).reshape(src.nJ, src.G)
        out = np.zeros((dst.nJ, dst.G), dtype=np.int64)
        if src.nJ == 0 or dst.nJ == 0:
            return out.reshape(-1)
        DU = np.einsum("jg,gyh->jyh", U, lv.D) % lv.mod
        m = self._d_map(L, n)
        if m.shape[0]:
            np.add.at(out, m[:, 2], m[:, 3:4] * DU[m[:, 0], m[:, 1]])
        return out.reshape(-1) % lv.mod

    def wedge_forms(self, L: int, a: int, u, b: int, v) -> np.ndarray:
        lv = self.levels[L]
        da, db, dc = self.deg[L, a], self.deg[L, b], self.deg[L, a + b]
        U = np.asarray(u, dtype=np.int64).reshape(da.nJ, lv.G)
        W = np.asarray(v, dtype=np.int64).reshape(db.nJ, lv.G)
        out = np.zeros((dc.nJ, lv.G), dtype=np.int64)
        for I, i in da.index.items():
            if not U[i].any():
                continue
            M = lv.coeff_matrix(U[i])
            for J, j in db.index.items():
                if not W[j].any() or set(I) & set(J):
                    continue
                seq = I + J
                inv = sum(1 for x in range(len(seq)) for y in range(x + 1, len(seq)) if seq[x] > seq[y])
                K = tuple(sorted(seq))
                out[dc.index[K]] += (-1) ** inv * (W[j] @ M)
        return out.reshape(-1) % lv.mod

    def coeff_times(self, L: int, n: int, c, u) -> np.ndarray:
        lv = self.levels[L]
        dd = self.deg[L, n]
        U = np.asarray(u, dtype=np.int64).reshape(dd.nJ, lv.G)
        return (U @ lv.coeff_matrix(c)).reshape(-1) % lv.mod

    def symbol(self, L: int, n: int, coeff, J: tuple) -> np.ndarray:
        dd = self.deg[L, n]
        out = np.zeros((dd.nJ, dd.G), dtype=np.int64)
        out[dd.index[tuple(J)]] = coeff
        return out.reshape(-1) % self.levels[L].mod

    def one_form(self, L: int, coeffs_by_y: np.ndarray) -> np.ndarray:
        """(ny, G) array of dy coefficients as a degree-1 ambient vector."""
        return np.asarray(coeffs_by_y, dtype=np.int64).reshape(-1) % self.levels[L].mod

    def d_coeff(self, L: int, c) -> np.ndarray:
        """d of a degree-0 element given by digits."""
        return self.one_form(L, self.levels[L].D_of(c))

    def dy_product(self, L: int, forms: list[np.ndarray]) -> np.ndarray:
        """Wedge of a list of 1-forms (as a degree len(forms) vector)."""
        lv = self.levels[L]
        acc = self.symbol(L, 0, lv.one, ())
        for k, f in enumerate(forms):
            acc = self.wedge_forms(L, k, acc, 1, f)
        return acc

    # -------------------------------------------------------------- level operators
    def _frob_coeff(self, L: int) -> np.ndarray:
        """Digits at level L-1 of F(generator) for every generator at level L."""
        A = self.A
        lo = self.levels[L - 1]
        hi = self.levels[L]
        out = np.zeros((hi.G, lo.G), dtype=np.int64)
        for g in range(hi.G):
            i, k = divmod(g, A.n)
            if i <= L - 2:
                out[g] = lo.vteich(i, A.frobenius(A.unit_vector(k)))
        return out

    def frob_dy(self, L: int, y) -> np.ndarray:
        """F(dy) at level L-1 for y in Y_L."""
        A = self.A
        lo = self.levels[L - 1]
        if y[0] == "T":
            j = y[1]
            xj = lo.gen_elems[j]
            coeff = lo.teich(A.pow(xj, self.p - 1))
            arr = np.zeros((lo.ny, lo.G), dtype=np.int64)
            arr[lo.yindex[y]] = coeff
            return self.one_form(L - 1, arr)
        _, i, mi = y
        if i - 1 >= 1:
            arr = np.zeros((lo.ny, lo.G), dtype=np.int64)
            arr[lo.yindex[("V", i - 1, mi)]] = lo.one
            return self.one_form(L - 1, arr)
        g = mi * A.e
        return self.d_coeff(L - 1, np.eye(lo.G, dtype=np.int64)[g])

    def ver_dy(self, L: int, y) -> np.ndarray:
        """dV(y) at level L+1 for y in Y_L."""
        hi = self.levels[L + 1]
        if y[0] == "T":
            v = hi.vteich(1, hi.gen_elems[y[1]])
            return self.d_coeff(L + 1, v)
        _, i, mi = y
        arr = np.zeros((hi.ny, hi.G), dtype=np.int64)
        arr[hi.yindex[("V", i + 1, mi)]] = hi.one
        return self.one_form(L + 1, arr)

    def F_matrix(self, L: int, n: int) -> np.ndarray:
        """F: level L -> L-1 on ambient symbols of degree n."""
        key = (L, n)
        if key not in self._F:
            hi, lo = self.levels[L], self.levels[L - 1]
            src, dst = self.deg[L, n], self.deg[L - 1, n]
            fc = self._frob_coeff(L)
            fdy = [self.frob_dy(L, y) for y in hi.Y]
            M = np.zeros((src.nJ, hi.G, dst.cols), dtype=np.int64)
            for J, k in src.index.items():
                w = self.dy_product(L - 1, [fdy[y] for y in J]).reshape(dst.nJ, lo.G)
                if not w.any():
                    continue
                # rows: F(g) * w for every generator g
                prod = np.einsum("gh,jk,hkl->gjl", fc, w, lo.mult) % lo.mod
                M[k] = prod.reshape(hi.G, dst.cols)
            self._F[key] = M.reshape(src.cols, dst.cols)
        return self._F[key]

    def V_matrix(self, L: int, n: int) -> np.ndarray:
        """V: level L -> L+1."""
        key = (L, n)
        if key not in self._V:
            lo, hi = self.levels[L], self.levels[L + 1]
            src, dst = self.deg[L, n], self.deg[L + 1, n]
            shift = np.zeros((lo.G, hi.G), dtype=np.int64)
            for g in range(lo.G):
                shift[g, g + self.A.n] = 1
            vdy = [self.ver_dy(L, y) for y in lo.Y]
            M = np.zeros((src.nJ, lo.G, dst.cols), dtype=np.int64)
            for J, k in src.index.items():
                w = self.dy_product(L + 1, [vdy[y] for y in J]).reshape(dst.nJ, hi.G)
                if not w.any():
                    continue
                prod = np.einsum("gh,jk,hkl->gjl", shift, w, hi.mult) % hi.mod
                M[k] = prod.reshape(lo.G, dst.cols)
            self._V[key] = M.reshape(src.cols, dst.cols)
        return self._V[key]

    def R_matrix(self, L: int, n: int) -> np.ndarray:
        """Restriction: level L -> L-1."""
        key = (L, n)
        if key not in self._R:
            hi, lo = self.levels[L], self.levels[L - 1]
            src, dst = self.deg[L, n], self.deg[L - 1, n]
            M = np.zeros((src.cols, dst.cols), dtype=np.int64)
            for J, k in src.index.items():
                if any(y >= lo.ny for y in J):
                    continue
                kk = dst.index[J]
                for g in range(lo.G):
                    M[k * hi.G + g, kk * lo.G + g] = 1
            self._R[key] = M
        return self._R[key]

    # -------------------------------------------------------------- seeds
    def _seed_leibniz(self, L: int):
        lv = self.levels[L]
        out = []
        for g in range(lv.G):
            eg = np.eye(lv.G, dtype=np.int64)[g]
            for h in range(g, lv.G):
                eh = np.eye(lv.G, dtype=np.int64)[h]
                gh = lv.mult[g, h]
                rel = self.d_coeff(L, gh) - self.coeff_times(L, 1, eg, self.d_coeff(L, eh)) \
                    - self.coeff_times(L, 1, eh, self.d_coeff(L, eg))
                out.append(rel % lv.mod)
        return out

    def _seed_generators(self, L: int):
        """d[x_j] = d of the digits of [x_j]; matters when x_j is not a basis monomial."""
        lv = self.levels[L]
        out = []
        for j in range(len(self.A.generators)):
            dxj = np.zeros((lv.ny, lv.G), dtype=np.int64)
            dxj[lv.yindex[("T", j)]] = lv.one
            rel = self.one_form(L, dxj) - self.d_coeff(L, lv.teich(lv.gen_elems[j]))
            if (rel % lv.mod).any():
                out.append(rel % lv.mod)
        return out

    def _seed_projection(self, L: int):
        """d[x_j] V(a) - V([x_j]^(p-1) a) dV[x_j] for a a generator of level L-1."""
        if L < 2:
            return []
        lo, hi = self.levels[L - 1], self.levels[L]
        A = self.A
        out = []
        for j in range(len(A.generators)):
            xj = hi.gen_elems[j]
            dxj = np.zeros((hi.ny, hi.G), dtype=np.int64)
            dxj[hi.yindex[("T", j)]] = hi.one
            dxj = self.one_form(L, dxj)
            dvx = self.d_coeff(L, hi.vteich(1, xj))
            tp = lo.teich(A.pow(xj, self.p - 1))
            for a in range(lo.G):
                ea = np.eye(lo.G, dtype=np.int64)[a]
                va = np.zeros(hi.G, dtype=np.int64)
                va[a + A.n] = 1
                prod = lo.coeff_mul(tp, ea)
                vprod = np.zeros(hi.G, dtype=np.int64)
                vprod[A.n:] = prod
                rel = self.coeff_times(L, 1, va, dxj) - self.coeff_times(L, 1, vprod, dvx)
                out.append(rel % hi.mod)
        return out

    def _teich_elements(self, rng):
        A = self.A
        if A.order <= TEICH_RULE_FULL_BOUND:
            self.transcript["teichmuller_rule"] = f"all {A.order} elements"
            return list(A.elements())
        elems = [A.unit_vector(k) for k in range(A.n)]
        for k in range(A.n):
            for l in range(k + 1, A.n):
                elems.append((A.unit_vector(k) + A.unit_vector(l)) % self.p)
        while len(elems) < TEICH_RULE_SAMPLE:
            elems.append(rng.integers(0, self.p, A.n).astype(np.int64))
        self.transcript["teichmuller_rule"] = f"sample of {len(elems)} elements"
        return elems

    def _seed_teichmuller(self, L: int, elems):
        """F d[a] - [a]^(p-1) d[a] at level L, with d[a] taken at level L+1."""
        cap = length_cap(self.p)
        if L + 1 > cap:
            return []
        if L + 1 <= self.top:
            hi = self.levels[L + 1]
        else:
            if self._next_level is None:
                self._next_level = LevelData(self.A, L + 1)
            hi = self._next_level
        lo = self.levels[L]
        A = self.A
        out = []
        for a in elems:
            if not a.any():
                continue
            da_hi = np.tensordot(hi.teich(a), hi.D, axes=(0, 0)) % hi.mod
            fa = self._apply_F_degree1(hi, lo, da_hi)
            rhs = self.coeff_times(L, 1, lo.teich(A.pow(a, self.p - 1)), self.d_coeff(L, lo.teich(a)))
            out.append((fa - rhs) % lo.mod)
        return out

    def _apply_F_degree1(self, hi: LevelData, lo: LevelData, form) -> np.ndarray:
        """F of a degree-1 form given as (ny_hi, G_hi) coefficients."""
        A = self.A
        L = hi.L
        fc = np.zeros((hi.G, lo.G), dtype=np.int64)
        for g in range(hi.G):
            i, k = divmod(g, A.n)
            if i <= L - 2:
                fc[g] = lo.vteich(i, A.frobenius(A.unit_vector(k)))
        out = np.zeros(lo.ny * lo.G, dtype=np.int64)
        for yi, y in enumerate(hi.Y):
            c = form[yi]
            if not c.any():
                continue
            fcoef = (c @ fc) % lo.mod
            if y[0] == "T":
                arr = np.zeros((lo.ny, lo.G), dtype=np.int64)
                arr[lo.yindex[y]] = lo.coeff_mul(fcoef, lo.teich(A.pow(lo.gen_elems[y[1]], self.p - 1)))
                out += arr.reshape(-1)
            else:
                _, i, mi = y
                if i - 1 >= 1:
                    arr = np.zeros((lo.ny, lo.G), dtype=np.int64)
                    arr[lo.yindex[("V", i - 1, mi)]] = fcoef
                    out += arr.reshape(-1)
                else:
                    dm = lo.D_of(np.eye(lo.G, dtype=np.int64)[mi * A.e])
                    out += (dm @ lo.coeff_matrix(fcoef)).reshape(-1)
        return out % lo.mod

    # -------------------------------------------------------------- saturation
    def _saturate(self, seed: int):
        rng = np.random.default_rng(seed)
        queue = deque()
        tr = self.transcript["seeds"]
        for L in range(1, self.top + 1):
            rels = self.levels[L].wd.relations()
            tr[f"witt_group_L{L}"] = len(rels)
            for v in rels:
                queue.append((L, 0, v % self.levels[L].mod))
        if self.nmax >= 1:
            elems = self._teich_elements(rng)
            for L in range(1, self.top + 1):
                for name, rels in (("generators", self._seed_generators(L)),
                                   ("leibniz", self._seed_leibniz(L)),
                                   ("projection", self._seed_projection(L)),
                                   ("teichmuller", self._seed_teichmuller(L, elems))):
                    tr[f"{name}_L{L}"] = len(rels)
                    for v in rels:
                        queue.append((L, 1, v))
        gens = {L: self.ring_generators(L) for L in self.levels}
        pushes = self.transcript["pushes"]
        count = 0
        while queue:
            L, n, v = queue.popleft()
            count += 1
            if count > self.budget:
                raise SaturationBudgetExceeded(f"more than {self.budget} relation insertions",
                                               transcript=self.transcript)
            grp = self.groups[L, n]
            if not grp.add_relation(v):
                continue
            self.transcript["growth"] += 1
            mod = self.levels[L].mod
            dd = self.deg[L, n]
            U = v.reshape(dd.nJ, dd.G)
            for M in gens[L]:
                queue.append((L, n, (U @ M).reshape(-1) % mod))
            if n + 1 <= self.nmax:
                for y in range(self.levels[L].ny):
                    queue.append((L, n + 1, self.wedge_dy(L, n, v, y)))
                queue.append((L, n + 1, self.d(L, n, v)))
            if L >= 2:
                lo_mod = self.levels[L - 1].mod
                queue.append((L - 1, n, (v @ self.F_matrix(L, n)) % lo_mod))
                queue.append((L - 1, n, (v @ self.R_matrix(L, n)) % lo_mod))
                pushes["F"] = pushes.get("F", 0) + 1
            if L + 1 <= self.top:
                queue.append((L + 1, n, (v @ self.V_matrix(L, n)) % self.levels[L + 1].mod))
                pushes["V"] = pushes.get("V", 0) + 1
        self.transcript["insertions"] = count

    # -------------------------------------------------------------- results
    def group(self, L: int, n: int) -> PresentedGroup:
        return self.groups[L, n]

    def invariants(self, L: int, n: int) -> FiniteAbelianPGroup:
        return self.groups[L, n].invariants()

    def reduce(self, L: int, n: int, v) -> np.ndarray:
        return self.groups[L, n].reduce(v)

    def is_zero(self, L: int, n: int, v) -> bool:
        return self.groups[L, n].is_zero(v)

    def symbols(self, L: int, n: int) -> np.ndarray:
        return np.eye(self.deg[L, n].cols, dtype=np.int64)

    def relation_rows(self, L: int, n: int) -> np.ndarray:
        return self.groups[L, n].relation_rows()

    def dump_transcript(self) -> str:
        lines = [f"algebra {self.A!r} top level {self.top} max degree {self.nmax}"]
        for L in range(1, self.top + 1):
            lv = self.levels[L]
            lines.append(f"level {L}: {lv.G} coefficient symbols, ring generators "
                         + ", ".join(lv.labels))
            for n in range(self.nmax + 1):
                g = self.groups[L, n]
                lines.append(f"  degree {n}: {self.deg[L, n].cols} symbols, "
                             f"{int(g.has.sum())} relation pivots, group {g.invariants()}")
        for k, v in sorted(self.transcript["seeds"].items()):
            lines.append(f"seed {k}: {v}")
        lines.append(f"Teichmueller rule imposed on {self.transcript['teichmuller_rule']}")
        lines.append(f"insertions {self.transcript['insertions']}, growth {self.transcript['growth']}")
        return "\n".join(lines)


_ENGINES: dict = {}


def drw_engine(A: ArtinAlgebra, r: int, nmax: int, headroom: int = 1) -> DRWEngine:
    """Engine covering levels 1..min(r + headroom, cap) and degrees 0..nmax."""
    cap = length_cap(A.p)
    if r > cap:
        raise CapExceeded(f"level {r} exceeds the Witt length cap {cap}", level=r)
    top = min(r + headroom, cap)
    for (aid, t, nm), eng in _ENGINES.items():
        if aid == id(A) and eng.A is A and t == top and nm >= nmax:
            return eng
    eng = DRWEngine(A, top, nmax, requested=r)
    _ENGINES[(id(A), top, nmax)] = eng
    return eng


# ------------------------------------------------------------------ public API

@dataclass
class DRWComplex:
    """W_r Omega^n_R together with the engine that produced it."""

    algebra: ArtinAlgebra
    r: int
    n: int
    engine: DRWEngine = field(repr=False)

    @property
    def group(self) -> FiniteAbelianPGroup:
        return self.engine.invariants(self.r, self.n)

    @property
    def order(self) -> int:
        return self.engine.group(self.r, self.n).order

    def canonical(self, v) -> np.ndarray:
        return self.engine.reduce(self.r, self.n, v)

    def generators(self) -> list[str]:
        eng = self.engine
        lv = eng.levels[self.r]
        dd = eng.deg[self.r, self.n]
        A = self.algebra
        labels = A.basis_labels()
        out = []
        for J in dd.subsets:
            for g in range(lv.G):
                i, k = divmod(g, A.n)
                coeff = f"V^{i}[{labels[k]}]" if i else f"[{labels[k]}]"
                dy = "".join(f"d{lv.labels[y]}" for y in J)
                out.append(coeff + dy)
        return out


def drw_presentation(A: ArtinAlgebra, r: int, n: int, headroom: int = 1,
                     check: bool = True) -> DRWComplex:
    """W_r Omega^n_R, with degree n + 1 saturated too so that d is available.

    With ``check`` the oracle suite runs first and any failure raises
    OracleMismatch carrying the saturation transcript.
    """
    eng = drw_engine(A, r, n + 1, headroom)
    if check:
        rep = oracle_suite(eng, r)
        bad = {k: v for k, v in rep.items() if not v}
        if bad:
            raise OracleMismatch(f"de Rham-Witt oracles failed: {sorted(bad)}",
                                 failed=sorted(bad), transcript=eng.dump_transcript())
    return DRWComplex(A, r, n, eng)


@dataclass
class OperatorCheck:
    name: str
    checked: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def drw_operators(eng: DRWEngine, L: int, n: int) -> dict:
    """Matrices of F, V, Res, d at (L, n), each checked to kill the relation submodule."""
    out = {}
    rels = eng.relation_rows(L, n)
    if L >= 2:
        for name, M in (("F", eng.F_matrix(L, n)), ("R", eng.R_matrix(L, n))):
            for row in rels:
                img = (row @ M) % eng.levels[L - 1].mod
                if not eng.is_zero(L - 1, n, img):
                    raise IllDefinedOperator(f"{name} does not kill a relation at level {L}",
                                             operator=name, level=L, degree=n)
            out[name] = M
    if L + 1 <= eng.top:
        M = eng.V_matrix(L, n)
        for row in rels:
            if not eng.is_zero(L + 1, n, (row @ M) % eng.levels[L + 1].mod):
                raise IllDefinedOperator(f"V does not kill a relation at level {L}",
                                         operator="V", level=L, degree=n)
        out["V"] = M
    if n + 1 <= eng.nmax:
        for row in rels:
            if not eng.is_zero(L, n + 1, eng.d(L, n, row)):
                raise IllDefinedOperator(f"d does not kill a relation at level {L}",
                                         operator="d", level=L, degree=n)
        out["d"] = np.array([eng.d(L, n, e) for e in eng.symbols(L, n)], dtype=np.int64).reshape(
            eng.deg[L, n].cols, eng.deg[L, n + 1].cols)
    return out


def verify_identities(eng: DRWEngine, r: int, nmax: int | None = None) -> dict[str, OperatorCheck]:
    """Exhaustive checks on every symbol of every level <= r and degree <= nmax."""
    nmax = eng.nmax if nmax is None else nmax
    p = eng.p
    checks = {k: OperatorCheck(k, 0, []) for k in
              ("FV=p", "VF=p", "FdV=d", "dF=pFd", "(F-1)V=-V", "RV=VR", "RF=FR", "dd=0")}

    def fail(name, L, n, idx):
        checks[name].failures.append({"level": L, "degree": n, "symbol": int(idx)})

    for L in range(1, r + 1):
        for n in range(0, nmax + 1):
            mod = eng.levels[L].mod
            for idx, e in enumerate(eng.symbols(L, n)):
                if eng.is_zero(L, n, e):
                    continue
                if L + 1 <= eng.top:
                    fv = (e @ eng.V_matrix(L, n)) @ eng.F_matrix(L + 1, n) % mod
                    checks["FV=p"].checked += 1
                    if not eng.is_zero(L, n, fv - p * e):
                        fail("FV=p", L, n, idx)
                    # (F - 1)V = -V modulo p: F V x lies in p W_L
                    checks["(F-1)V=-V"].checked += 1
                    if not eng.is_zero(L, n, fv - p * e):
                        fail("(F-1)V=-V", L, n, idx)
                    if n + 1 <= eng.nmax and n >= 0:
                        v = (e @ eng.V_matrix(L, n)) % eng.levels[L + 1].mod
                        fdv = eng.d(L + 1, n, v) @ eng.F_matrix(L + 1, n + 1) % mod
                        checks["FdV=d"].checked += 1
                        if not eng.is_zero(L, n + 1, fdv - eng.d(L, n, e)):
                            fail("FdV=d", L, n, idx)
                if L >= 2:
                    lo = eng.levels[L - 1].mod
                    fe = (e @ eng.F_matrix(L, n)) % lo
                    vf = (fe @ eng.V_matrix(L - 1, n)) % mod
                    checks["VF=p"].checked += 1
                    if not eng.is_zero(L, n, vf - p * e):
                        fail("VF=p", L, n, idx)
                    if n + 1 <= eng.nmax:
                        lhs = eng.d(L - 1, n, fe)
                        rhs = p * ((eng.d(L, n, e) @ eng.F_matrix(L, n + 1)) % lo)
                        checks["dF=pFd"].checked += 1
                        if not eng.is_zero(L - 1, n + 1, lhs - rhs):
                            fail("dF=pFd", L, n, idx)
                if L >= 2 and L - 1 >= 2:
                    # R F = F R from level L to L - 2
                    a = ((e @ eng.F_matrix(L, n)) % eng.levels[L - 1].mod) @ eng.R_matrix(L - 1, n)
                    b = ((e @ eng.R_matrix(L, n)) % eng.levels[L - 1].mod) @ eng.F_matrix(L - 1, n)
                    checks["RF=FR"].checked += 1
                    if not eng.is_zero(L - 2, n, (a - b) % eng.levels[L - 2].mod):
                        fail("RF=FR", L, n, idx)
                if 2 <= L and L + 1 <= eng.top:
                    a = ((e @ eng.V_matrix(L, n)) % eng.levels[L + 1].mod) @ eng.R_matrix(L + 1, n)
                    b = ((e @ eng.R_matrix(L, n)) % eng.levels[L - 1].mod) @ eng.V_matrix(L - 1, n)
                    checks["RV=VR"].checked += 1
                    if not eng.is_zero(L, n, (a - b) % mod):
                        fail("RV=VR", L, n, idx)
                if n + 2 <= eng.nmax:
                    checks["dd=0"].checked += 1
                    if not eng.is_zero(L, n + 2, eng.d(L, n + 1, eng.d(L, n, e))):
                        fail("dd=0", L, n, idx)
    return checks


# ------------------------------------------------------------------ dlog and pi - Fbar

def dlog_teich(eng: DRWEngine, L: int, u) -> np.ndarray:
    """dlog[u] = [u^-1] d[u] at level L."""
    A = eng.A
    lv = eng.levels[L]
    return eng.coeff_times(L, 1, lv.teich(A.inverse(u)), eng.d_coeff(L, lv.teich(u)))


def log_generators(eng: DRWEngine, L: int, n: int, units) -> np.ndarray:
    """Generators of W_L Omega^n_log: wedges of dlog of the given units."""
    lv = eng.levels[L]
    if n == 0:
        return eng.symbol(L, 0, lv.one, ()).reshape(1, -1)
    ones = [dlog_teich(eng, L, u) for u in units]
    # keep a generating set of the span of the 1-forms before wedging
    g1 = PresentedGroup(eng.p, L, eng.deg[L, 1].cols, eng.relation_rows(L, 1))
    basis = []
    for w in ones:
        if g1.add_relation(w):
            basis.append(w)
    if n == 1:
        return as_rows(np.array(basis), eng.deg[L, 1].cols)
    out = []
    for combo in itertools.combinations(range(len(basis)), n):
        w = basis[combo[0]]
        for k, j in enumerate(combo[1:], start=1):
            w = eng.wedge_forms(L, k, w, 1, basis[j])
        out.append(w)
    return as_rows(np.array(out), eng.deg[L, n].cols)


@dataclass
class LogGroup:
    group: FiniteAbelianPGroup
    generators: np.ndarray
    ambient: FiniteAbelianPGroup


def drw_log(A: ArtinAlgebra, r: int, n: int, units=None, headroom: int = 1) -> LogGroup:
    from .forms import dlog_units
    eng = drw_engine(A, r, max(n, 1), headroom)
    us = dlog_units(A, units)[0] if n >= 1 else []
    gens = log_generators(eng, r, n, us)
    grp = eng.group(r, n)
    return LogGroup(grp.subgroup_invariants(gens) if gens.shape[0] else FiniteAbelianPGroup(A.p),
                    gens, grp.invariants())


@dataclass
class PiFbarResult:
    kernel: FiniteAbelianPGroup
    cokernel: FiniteAbelianPGroup
    kernel_generators: np.ndarray
    log: FiniteAbelianPGroup
    log_in_kernel: bool
    log_equals_kernel: bool
    well_defined: bool
    images: np.ndarray = field(repr=False)


def _target_group(eng: DRWEngine, r: int, m: int) -> PresentedGroup:
    """W_r Omega^m modulo dV^(r-1) of level-1 forms of degree m-1."""
    tgt = PresentedGroup(eng.p, r, eng.deg[r, m].cols, eng.relation_rows(r, m))
    if m >= 1:
        for e in eng.symbols(1, m - 1):
            v = e
            for L in range(1, r):
                v = (v @ eng.V_matrix(L, m - 1)) % eng.levels[L + 1].mod
            tgt.add_relation(eng.d(r, m - 1, v))
    return tgt


def pi_Fbar(A: ArtinAlgebra, r: int, m: int, units=None) -> PiFbarResult:
    """pi - Fbar : W_r Omega^m -> W_r Omega^m / dV^(r-1) Omega^(m-1)."""
    cap = length_cap(A.p)
    if r + 1 > cap:
        raise CapExceeded(f"pi - Fbar at level {r} needs level {r + 1} > cap {cap}")
    eng = drw_engine(A, r + 1, max(m, 1), headroom=0 if r + 1 == cap else 1)
    src = eng.group(r, m)
    tgt = _target_group(eng, r, m)
    mod = eng.levels[r].mod
    n_sym = eng.deg[r, m].cols
    # lift each level-r symbol to the same symbol at level r + 1
    lift = np.zeros((n_sym, eng.deg[r + 1, m].cols), dtype=np.int64)
    hi, lo = eng.levels[r + 1], eng.levels[r]
    for J, k in eng.deg[r, m].index.items():
        kk = eng.deg[r + 1, m].index[J]
        for g in range(lo.G):
            lift[k * lo.G + g, kk * hi.G + g] = 1
    check = (lift @ eng.R_matrix(r + 1, m)) % mod
    if not all(eng.is_zero(r, m, check[i] - np.eye(n_sym, dtype=np.int64)[i]) for i in range(n_sym)):
        raise LiftFailure("restriction does not split on symbols")
    fbar = (lift @ eng.F_matrix(r + 1, m)) % mod
    images = (np.eye(n_sym, dtype=np.int64) - fbar) % mod
    # well-definedness: F of ker(R: level r+1 -> r) lands in dV^(r-1)
    hi_grp = eng.group(r + 1, m)
    kr = hom_kernel(hi_grp, src, eng.R_matrix(r + 1, m))
    well = all(tgt.is_zero((row @ eng.F_matrix(r + 1, m)) % mod) for row in kr)
    kern = hom_kernel(src, tgt, images)
    kinv = src.subgroup_invariants(kern) if kern.shape[0] else FiniteAbelianPGroup(A.p)
    coker = tgt.copy()
    coker.add_relations(images)
    from .forms import dlog_units
    us = dlog_units(A, units)[0] if m >= 1 else []
    lg = log_generators(eng, r, m, us)
    log_inv = src.subgroup_invariants(lg) if lg.shape[0] else FiniteAbelianPGroup(A.p)
    img_of_log = (lg @ images) % mod if lg.shape[0] else lg
    log_in = all(tgt.is_zero(x) for x in img_of_log)
    log_eq = log_in and log_inv.order == kinv.order
    return PiFbarResult(kinv, coker.invariants(), kern, log_inv, log_in, log_eq, well, images)


# ------------------------------------------------------------------ oracles

def _iterate_V(eng: DRWEngine, v, start: int, steps: int, n: int) -> np.ndarray:
    for L in range(start, start + steps):
        v = (v @ eng.V_matrix(L, n)) % eng.levels[L + 1].mod
    return v


def filtration_generators(eng: DRWEngine, L: int, n: int, k: int) -> np.ndarray:
    """Generators of V^k W_(L-k) Omega^n + dV^k W_(L-k) Omega^(n-1) inside level L."""
    out = []
    for e in eng.symbols(L - k, n):
        out.append(_iterate_V(eng, e, L - k, k, n))
    if n >= 1:
        for e in eng.symbols(L - k, n - 1):
            out.append(eng.d(L, n - 1, _iterate_V(eng, e, L - k, k, n - 1)))
    return as_rows(np.array(out), eng.deg[L, n].cols)


def restriction_kernel_check(eng: DRWEngine, L: int, n: int) -> bool:
    """ker(R: W_L -> W_(L-1)) is generated by V^(L-1) and dV^(L-1) of level-1 forms."""
    grp = eng.group(L, n)
    kr = hom_kernel(grp, eng.group(L - 1, n), eng.R_matrix(L, n))
    fil = filtration_generators(eng, L, n, L - 1)
    return grp.contains_all(kr, fil) and grp.subgroup_log_order(kr) == grp.subgroup_log_order(fil)


def level_one_matches_forms(eng: DRWEngine, n: int) -> bool:
    from .forms import kaehler_space
    sp = kaehler_space(eng.A, n)
    grp = eng.group(1, n)
    if sp.N != eng.deg[1, n].cols:
        return False
    if not all(grp.is_zero(r) for r in as_rows(sp.relations, sp.N)):
        return False
    return all(sp.quotient.contains(r % eng.p) for r in grp.relation_rows())


def oracle_suite(eng: DRWEngine, r: int) -> dict[str, bool]:
    from .witt import is_perfect, witt_group_invariants
    A = eng.A
    out = {}
    top_deg = eng.nmax
    out["level_one_collapse"] = all(level_one_matches_forms(eng, n) for n in range(top_deg + 1))
    out["degree_zero_witt"] = all(eng.invariants(L, 0) == witt_group_invariants(A, L)
                                  for L in range(1, r + 1))
    if is_perfect(A):
        out["perfect_vanishing"] = all(eng.group(L, n).order == 1
                                       for L in range(1, r + 1) for n in range(1, top_deg + 1))
    out["restriction_kernel"] = all(restriction_kernel_check(eng, L, n)
                                    for L in range(2, r + 1) for n in range(top_deg + 1))
    try:
        for L in range(1, r + 1):
            for n in range(top_deg):
                drw_operators(eng, L, n)
        out["operators_well_defined"] = True
    except IllDefinedOperator:
        out["operators_well_defined"] = False
    return out


# ------------------------------------------------------------------ functoriality

def ring_map_matrix(src: DRWEngine, dst: DRWEngine, S: np.ndarray, L: int, n: int) -> np.ndarray:
    """W_L Omega^n of the algebra map a -> a @ S, on ambient symbols."""
    A = src.A
    lv_s, lv_d = src.levels[L], dst.levels[L]
    S = np.asarray(S, dtype=np.int64)
    coeff = np.zeros((lv_s.G, lv_d.G), dtype=np.int64)
    for g in range(lv_s.G):
        i, k = divmod(g, A.n)
        coeff[g] = lv_d.vteich(i, S[k] % A.p)
    dimg = []
    for y in lv_s.Y:
        if y[0] == "T":
            digits = lv_d.teich((A.gen(y[1]) @ S) % A.p)
        else:
            _, i, mi = y
            digits = lv_d.vteich(i, S[mi * A.e] % A.p)
        dimg.append(dst.d_coeff(L, digits))
    sd, dd = src.deg[L, n], dst.deg[L, n]
    M = np.zeros((sd.nJ, lv_s.G, dd.cols), dtype=np.int64)
    for J, k in sd.index.items():
        w = dst.dy_product(L, [dimg[y] for y in J]).reshape(dd.nJ, lv_d.G)
        if w.any():
            M[k] = (np.einsum("gh,jk,hkl->gjl", coeff, w, lv_d.mult) % lv_d.mod).reshape(lv_s.G, dd.cols)
    return M.reshape(sd.cols, dd.cols)


def map_is_well_defined(src: DRWEngine, dst: DRWEngine, M, L: int, n: int) -> bool:
    mod = dst.levels[L].mod
    return all(dst.is_zero(L, n, (row @ M) % mod) for row in src.relation_rows(L, n))


# ------------------------------------------------------------------ further identities

@dataclass
class IdentityReport:
    name: str
    holds: bool
    detail: dict


def telescoping_identity(eng: DRWEngine, r: int, n: int) -> IdentityReport:
    """(F - R) sum_{i=1}^{r-1} dV^i R^i x = d R x for x at level r (degree n)."""
    bad = []
    if r < 2 or n + 1 > eng.nmax:
        return IdentityReport("(F-1)dSumV=d", True, {"checked": 0})
    fil = filtration_generators(eng, r - 1, n + 1, r - 2) if r >= 3 else np.zeros((0, eng.deg[r - 1, n + 1].cols), np.int64)
    tgt = PresentedGroup(eng.p, r - 1, eng.deg[r - 1, n + 1].cols, eng.relation_rows(r - 1, n + 1))
    tgt.add_relations(fil)
    count = 0
    for idx, x in enumerate(eng.symbols(r, n)):
        z = np.zeros(eng.deg[r, n + 1].cols, dtype=np.int64)
        for i in range(1, r):
            y = x
            for L in range(r, r - i, -1):
                y = (y @ eng.R_matrix(L, n)) % eng.levels[L - 1].mod
            y = _iterate_V(eng, y, r - i, i, n)
            z = z + eng.d(r, n, y)
        lo = eng.levels[r - 1].mod
        lhs = (z @ eng.F_matrix(r, n + 1) - z @ eng.R_matrix(r, n + 1)) % lo
        rhs = eng.d(r - 1, n, (x @ eng.R_matrix(r, n)) % lo)
        count += 1
        if not tgt.is_zero(lhs - rhs):
            bad.append(idx)
    return IdentityReport("(F-1)dSumV=d", not bad, {"checked": count, "witnesses": bad[:5]})


def frobenius_image_check(eng: DRWEngine, s: int, n: int) -> IdentityReport:
    """im(F: W_s -> W_(s-1)) against {x : dx in p W_(s-1)}, both containments."""
    if s < 2 or n + 1 > eng.nmax:
        return IdentityReport("image_of_F", True, {"checked": 0})
    lo = s - 1
    src = eng.group(lo, n)
    img = (eng.symbols(s, n) @ eng.F_matrix(s, n)) % eng.levels[lo].mod
    tgt = PresentedGroup(eng.p, lo, eng.deg[lo, n + 1].cols, eng.relation_rows(lo, n + 1))
    tgt.add_relations(eng.p * np.eye(eng.deg[lo, n + 1].cols, dtype=np.int64))
    dmat = np.array([eng.d(lo, n, e) for e in eng.symbols(lo, n)], dtype=np.int64).reshape(
        eng.deg[lo, n].cols, eng.deg[lo, n + 1].cols)
    divisible = hom_kernel(src, tgt, dmat)
    forward = src.contains_all(img, divisible) if divisible.shape[0] else not any(
        not src.is_zero(v) for v in img)
    backward = src.contains_all(divisible, img)
    return IdentityReport("image_of_F", forward and backward,
                          {"image_in_divisible": bool(forward), "divisible_in_image": bool(backward)})


def restriction_kills_torsion(eng: DRWEngine, s: int, n: int) -> IdentityReport:
    """R: W_s -> W_(s-1) kills every x with p x = 0."""
    if s < 2:
        return IdentityReport("R_kills_p_torsion", True, {"checked": 0})
    grp = eng.group(s, n)
    cols = eng.deg[s, n].cols
    tors = hom_kernel(grp, grp, eng.p * np.eye(cols, dtype=np.int64))
    lo = eng.levels[s - 1].mod
    bad = [i for i, x in enumerate(tors) if not eng.is_zero(s - 1, n, (x @ eng.R_matrix(s, n)) % lo)]
    return IdentityReport("R_kills_p_torsion", not bad, {"torsion_generators": int(tors.shape[0]),
                                                         "survivors": len(bad)})


def r_minus_f(eng: DRWEngine, L: int, n: int) -> np.ndarray:
    """R - F : W_L Omega^n -> W_(L-1) Omega^n on symbols."""
    return (eng.R_matrix(L, n) - eng.F_matrix(L, n)) % eng.levels[L - 1].mod
