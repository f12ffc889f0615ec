"""Finite-dimensional commutative algebras over GF(q) with exact normal forms.

Elements are dense int64 vectors over F_p.  Coordinate ``i*e + j`` is the
coefficient of alpha^j * m_i, where m_i runs over the standard monomials and
alpha generates F_q over F_p.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import linalg
from .errors import (CapExceeded, GuardError, InfiniteDimensional, NotCommutativeInput,
                     RingSyntaxError, UnitEnumerationTooLarge)
from .fields import FiniteField
from .poly import Poly, groebner, reduce_poly

DEFAULT_MAX_DIM = 64
DEFAULT_ENUM_BOUND = 2 ** 20


def _standard_monomials(gb: list[Poly], nvars: int) -> list[tuple[int, ...]]:
    leads = [g.lead()[0] for g in gb]
    if any(sum(l) == 0 for l in leads):
        return []
    for i in range(nvars):
        if not any(l[i] > 0 and sum(l) == l[i] for l in leads):
            raise InfiniteDimensional(f"no pure power of variable {i} among the leading terms")
    seen = {(0,) * nvars}
    frontier = [(0,) * nvars]
    while frontier:
        nxt = []
        for m in frontier:
            for i in range(nvars):
                e = list(m)
                e[i] += 1
                e = tuple(e)
                if e in seen or any(all(a <= b for a, b in zip(l, e)) for l in leads):
                    continue
                seen.add(e)
                nxt.append(e)
        frontier = nxt
    return sorted(seen, key=lambda m: tuple(reversed(m)))


class ArtinAlgebra:
    """F_q[x_1..x_m]/(relations), finite over F_q."""

    def __init__(self, field: FiniteField, generators, relations, gb, monomials,
                 max_dim=DEFAULT_MAX_DIM, enum_bound=DEFAULT_ENUM_BOUND):
        self.field = field
        self.p, self.e, self.q = field.p, field.e, field.q
        self.generators = list(generators)
        self.relations = list(relations)
        self.gb = gb
        self.basis = monomials
        self.dim = len(monomials)
        self.n = self.e * self.dim
        self.max_dim = max_dim
        self.enum_bound = enum_bound
        self._index = {m: i for i, m in enumerate(monomials)}
        self._build_table()
        self._analyse()

    # ------------------------------------------------------------ construction
    def _build_table(self):
        p, e, n = self.p, self.e, self.n
        F = self.field
        nv = len(self.generators)
        qtab = {}
        for i, a in enumerate(self.basis):
            for j in range(i, self.dim):
                b = self.basis[j]
                prod = tuple(x + y for x, y in zip(a, b))
                nf = reduce_poly(Poly(F, nv, {prod: 1}), self.gb)
                qtab[i, j] = qtab[j, i] = nf
        self._qtab = qtab
        T = np.zeros((n, n, n), dtype=np.int64)
        alpha_pows = [F.pow(F.generator, k) for k in range(2 * e)]
        for (i, j), nf in qtab.items():
            for a in range(e):
                for b in range(e):
                    s = alpha_pows[a + b]
                    row = T[i * e + a, j * e + b]
                    for mono, c in nf.terms.items():
                        k = self._index[mono]
                        row[k * e:(k + 1) * e] = F.to_vec(F.mul(c, s))
        self.table = T
        self._flat = T.reshape(n, n * n)
        self._one = self.from_poly(Poly.constant(F, nv, 1)) if self.n else np.zeros(0, np.int64)
        fr = np.zeros((n, n), dtype=np.int64)
        for k in range(n):
            fr[k] = self.pow(self.unit_vector(k), p)
        self.frobenius_matrix = fr

    def _analyse(self):
        p, n = self.p, self.n
        if n == 0:
            self.nilradical = np.zeros((0, 0), np.int64)
            self.num_local_factors = 0
            self.local = False
            self.maximal_ideal = None
            return
        k = 0
        while p ** k < self.dim + 1:
            k += 1
        acc = np.eye(n, dtype=np.int64)
        for _ in range(k):
            acc = (acc @ self.frobenius_matrix) % p
        self.nilradical = linalg.left_nullspace(acc, p)
        fe = np.eye(n, dtype=np.int64)
        for _ in range(self.e):
            fe = (fe @ self.frobenius_matrix) % p
        fixed = linalg.left_nullspace((fe - np.eye(n, dtype=np.int64)) % p, p)
        self.num_local_factors = fixed.shape[0] // self.e
        self.local = self.num_local_factors == 1
        self.maximal_ideal = self.nilradical if self.local else None

    # ------------------------------------------------------------ basics
    def __repr__(self) -> str:
        if not self.generators:
            return f"GF({self.q})"
        rels = ", ".join(r.format(self.generators) for r in self.relations)
        return f"GF({self.q})[{','.join(self.generators)}]/({rels})"

    @property
    def order(self) -> int:
        return self.q ** self.dim

    def zero(self) -> np.ndarray:
        return np.zeros(self.n, dtype=np.int64)

    def one(self) -> np.ndarray:
        return self._one.copy()

    def unit_vector(self, k: int) -> np.ndarray:
        v = self.zero()
        v[k] = 1
        return v

    def scalar(self, c: int) -> np.ndarray:
        """The field element c (an int code of F_q) as an algebra element."""
        v = self.zero()
        v[:self.e] = self.field.to_vec(c)
        return v

    def gen(self, name_or_index) -> np.ndarray:
        i = name_or_index if isinstance(name_or_index, int) else self.generators.index(name_or_index)
        return self.from_poly(Poly.var(self.field, len(self.generators), i))

    def from_poly(self, f: Poly) -> np.ndarray:
        nf = reduce_poly(f, self.gb)
        v = self.zero()
        for mono, c in nf.terms.items():
            k = self._index[mono]
            v[k * self.e:(k + 1) * self.e] = self.field.to_vec(c)
        return v

    def parse(self, text: str) -> np.ndarray:
        from .dsl import parse_polys
        polys = parse_polys(text, self.field, self.generators)
        if len(polys) != 1:
            raise RingSyntaxError("expected a single polynomial", 1, 1)
        return self.from_poly(polys[0])

    def to_poly(self, v) -> Poly:
        F = self.field
        terms = {}
        for i, m in enumerate(self.basis):
            c = F.from_vec(v[i * self.e:(i + 1) * self.e])
            if c:
                terms[m] = c
        return Poly(F, len(self.generators), terms)

    def format(self, v) -> str:
        return self.to_poly(np.asarray(v) % self.p).format(self.generators)

    def basis_labels(self) -> list[str]:
        """Names of the F_p basis vectors."""
        out = []
        F = self.field
        for m in self.basis:
            mono = Poly(F, len(self.generators), {m: 1}).format(self.generators)
            for j in range(self.e):
                if j == 0:
                    out.append(mono)
                else:
                    a = "a" if j == 1 else f"a^{j}"
                    out.append(a if mono == "1" else f"{a}*{mono}")
        return out

    @staticmethod
    def key(v) -> tuple:
        return tuple(int(x) for x in v)

    # ------------------------------------------------------------ arithmetic
    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul_matrix(self, a) -> np.ndarray:
        """Row j is a times the j-th basis vector."""
        return ((np.asarray(a, dtype=np.int64) @ self._flat) % self.p).reshape(self.n, self.n)

    def mul(self, a, b) -> np.ndarray:
        return (np.asarray(b, dtype=np.int64) @ self.mul_matrix(a)) % self.p

    def pow(self, a, k: int) -> np.ndarray:
        if k < 0:
            return self.pow(self.inverse(a), -k)
        r = self.one()
        b = np.asarray(a, dtype=np.int64) % self.p
        while k:
            if k & 1:
                r = self.mul(r, b)
            k >>= 1
            if k:
                b = self.mul(b, b)
        return r

    def frobenius(self, a) -> np.ndarray:
        return (np.asarray(a, dtype=np.int64) @ self.frobenius_matrix) % self.p

    def is_zero(self, a) -> bool:
        return not (np.asarray(a) % self.p).any()

    def is_unit(self, a) -> bool:
        return linalg.rank(self.mul_matrix(a), self.p) == self.n

    def inverse(self, a) -> np.ndarray:
        sol = self._solve_left(self.mul_matrix(a), self.one())
        if sol is None:
            raise GuardError(f"{self.format(a)} is not a unit")
        return sol

    def _solve_left(self, M, b):
        return linalg.solve_left(M, b, self.p)

    def is_nilpotent(self, a) -> bool:
        return self.is_zero(self.pow(a, max(self.dim, 1)))

    def nilpotency_index(self, a) -> int:
        """Least k >= 1 with a^k = 0, or 0 if a is not nilpotent."""
        x = np.asarray(a, dtype=np.int64) % self.p
        cur = x.copy()
        for k in range(1, self.dim + 2):
            if self.is_zero(cur):
                return k
            cur = self.mul(cur, x)
        return 0

    def in_maximal_ideal(self, a) -> bool:
        if self.maximal_ideal is None:
            raise CapExceeded("algebra is not local")
        return linalg.Quotient(self.n, self.maximal_ideal, self.p).contains(a)

    # ------------------------------------------------------------ enumeration
    def elements(self):
        if self.order > self.enum_bound:
            raise UnitEnumerationTooLarge(f"|R| = {self.order} exceeds {self.enum_bound}",
                                          order=self.order)
        for t in itertools.product(range(self.p), repeat=self.n):
            yield np.array(t, dtype=np.int64)

    def unit_count(self) -> int:
        if self.local:
            return self.order - self.p ** self.maximal_ideal.shape[0]
        return sum(1 for a in self.elements() if self.is_unit(a))

    def units(self, bound: int | None = None):
        bound = self.enum_bound if bound is None else bound
        if self.order > bound:
            raise UnitEnumerationTooLarge(f"|R| = {self.order} exceeds {bound}; supply unit generators",
                                          order=self.order)
        if self.local:
            mq = linalg.Quotient(self.n, self.maximal_ideal, self.p)
            return [a for a in self.elements() if not mq.contains(a)]
        return [a for a in self.elements() if self.is_unit(a)]

    def span(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.n)
        if rows.shape[0] == 0:
            return rows
        return linalg.row_basis(rows, self.p)

    def ideal(self, gens) -> np.ndarray:
        """F_p basis of the ideal generated by gens."""
        gens = np.asarray(gens, dtype=np.int64).reshape(-1, self.n)
        rows = [self.mul_matrix(g) for g in gens]
        if not rows:
            return np.zeros((0, self.n), dtype=np.int64)
        return self.span(np.concatenate(rows, axis=0))


def build_algebra(base: FiniteField, generators, relations, max_dim=DEFAULT_MAX_DIM,
                  enum_bound=DEFAULT_ENUM_BOUND) -> ArtinAlgebra:
    """Quotient of a polynomial ring over ``base`` by ``relations`` (Poly objects or strings)."""
    generators = list(generators)
    rels = []
    for f in relations:
        if isinstance(f, str):
            from .dsl import parse_polys
            try:
                rels.extend(parse_polys(f, base, generators))
            except RingSyntaxError as exc:
                raise NotCommutativeInput(f"cannot parse relation {f!r}: {exc}",
                                          line=exc.details.get("line"),
                                          column=exc.details.get("column")) from exc
        else:
            rels.append(f)
    gb = groebner(rels)
    monos = _standard_monomials(gb, len(generators))
    if len(monos) > max_dim:
        raise CapExceeded(f"dimension {len(monos)} exceeds cap {max_dim}", dim=len(monos))
    return ArtinAlgebra(base, generators, rels, gb, monos, max_dim, enum_bound)


def ideal_power(algebra: ArtinAlgebra, ideal_gens, s: int) -> np.ndarray:
    """F_p basis of I^s where I is generated by ideal_gens."""
    if s < 0:
        raise ValueError("s must be non-negative")
    if s == 0:
        return np.eye(algebra.n, dtype=np.int64)
    base = algebra.ideal(ideal_gens)
    cur = base
    for _ in range(s - 1):
        if cur.shape[0] == 0:
            break
        prods = [algebra.mul(x, y) for x in cur for y in base]
        cur = algebra.span(prods) if prods else cur[:0]
    return cur


def quotient_by_ideal(algebra: ArtinAlgebra, ideal_rows):
    """R/J for J given by F_p basis rows; returns (algebra, surjection matrix)."""
    ideal_rows = algebra.ideal(ideal_rows)
    extra = [algebra.to_poly(v) for v in ideal_rows]
    Q = build_algebra(algebra.field, algebra.generators, algebra.relations + extra,
                      algebra.max_dim, algebra.enum_bound)
    S = np.zeros((algebra.n, Q.n), dtype=np.int64)
    for k in range(algebra.n):
        S[k] = Q.from_poly(algebra.to_poly(algebra.unit_vector(k)))
    return Q, S
