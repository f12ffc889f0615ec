"""Sparse multivariate polynomials over a finite field, grevlex Groebner bases."""

from __future__ import annotations

from .fields import FiniteField


def grevlex_key(exp: tuple[int, ...]):
    return (sum(exp), tuple(-a for a in reversed(exp)))


def divides(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x <= y for x, y in zip(a, b))


class Poly:
    """Immutable polynomial: ``terms`` maps exponent tuples to nonzero field elements."""

    __slots__ = ("field", "nvars", "terms")

    def __init__(self, field: FiniteField, nvars: int, terms=None):
        self.field = field
        self.nvars = nvars
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def constant(cls, field, nvars, c: int) -> "Poly":
        return cls(field, nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, field, nvars, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(field, nvars, {tuple(e): 1})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms and self.nvars == other.nvars

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "Poly") -> "Poly":
        F = self.field
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = F.add(out.get(k, 0), v)
        return Poly(F, self.nvars, out)

    def __neg__(self) -> "Poly":
        F = self.field
        return Poly(F, self.nvars, {k: F.neg(v) for k, v in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        F = self.field
        out: dict = {}
        for a, x in self.terms.items():
            for b, y in other.terms.items():
                m = tuple(i + j for i, j in zip(a, b))
                out[m] = F.add(out.get(m, 0), F.mul(x, y))
        return Poly(F, self.nvars, out)

    def __pow__(self, k: int) -> "Poly":
        r = Poly.constant(self.field, self.nvars, 1)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    def scale(self, c: int, shift: tuple[int, ...] | None = None) -> "Poly":
        F = self.field
        if shift is None:
            return Poly(F, self.nvars, {k: F.mul(c, v) for k, v in self.terms.items()})
        return Poly(F, self.nvars, {tuple(i + j for i, j in zip(k, shift)): F.mul(c, v)
                                    for k, v in self.terms.items()})

    def lead(self) -> tuple[tuple[int, ...], int]:
        m = max(self.terms, key=grevlex_key)
        return m, self.terms[m]

    def monic(self) -> "Poly":
        _, c = self.lead()
        return self.scale(self.field.inv(c))

    def derivative(self, i: int) -> "Poly":
        F = self.field
        out = {}
        for k, v in self.terms.items():
            if k[i]:
                c = F.mul(v, F.from_int(k[i]))
                if c:
                    m = list(k)
                    m[i] -= 1
                    out[tuple(m)] = c
        return Poly(F, self.nvars, out)

    def format(self, names) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=grevlex_key, reverse=True):
            c = self.terms[m]
            mono = "*".join(n if a == 1 else f"{n}^{a}" for n, a in zip(names, m) if a)
            cs = self.field.format(c)
            if self.field.e > 1 and "+" in cs:
                cs = f"({cs})"
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts)


def reduce_poly(f: Poly, G: list[Poly]) -> Poly:
    """Full normal form of f modulo the list G (assumed monic)."""
    F = f.field
    work = dict(f.terms)
    rem: dict = {}
    leads = [(g.lead()[0], g) for g in G]
    while work:
        m = max(work, key=grevlex_key)
        c = work[m]
        for lm, g in leads:
            if divides(lm, m):
                shift = tuple(a - b for a, b in zip(m, lm))
                negc = F.neg(c)
                for k, v in g.terms.items():
                    mk = tuple(a + b for a, b in zip(k, shift))
                    nv = F.add(work.get(mk, 0), F.mul(negc, v))
                    if nv:
                        work[mk] = nv
                    else:
                        work.pop(mk, None)
                break
        else:
            rem[m] = c
            del work[m]
    return Poly(F, f.nvars, rem)


def _spoly(f: Poly, g: Poly) -> Poly:
    (a, _), (b, _) = f.lead(), g.lead()
    l = tuple(max(x, y) for x, y in zip(a, b))
    fa = f.scale(1, tuple(x - y for x, y in zip(l, a)))
    gb = g.scale(1, tuple(x - y for x, y in zip(l, b)))
    return fa - gb


def groebner(polys: list[Poly]) -> list[Poly]:
    """Reduced grevlex Groebner basis (Buchberger with the coprime-leads criterion)."""
    G = [p.monic() for p in polys if p]
    if not G:
        return []
    pairs = [(i, j) for j in range(len(G)) for i in range(j)]

    def pair_key(ij):
        a, b = G[ij[0]].lead()[0], G[ij[1]].lead()[0]
        return grevlex_key(tuple(max(x, y) for x, y in zip(a, b)))

    while pairs:
        pairs.sort(key=pair_key)
        i, j = pairs.pop(0)
        a, b = G[i].lead()[0], G[j].lead()[0]
        if all(x == 0 or y == 0 for x, y in zip(a, b)):
            continue
        r = reduce_poly(_spoly(G[i], G[j]), G)
        if r:
            G.append(r.monic())
            k = len(G) - 1
            pairs.extend((i2, k) for i2 in range(k))
    # minimalize then interreduce
    minimal = []
    for i, g in enumerate(G):
        lm = g.lead()[0]
        dominated = False
        for j, h in enumerate(G):
            if j == i:
                continue
            hm = h.lead()[0]
            if divides(hm, lm) and (hm != lm or j < i):
                dominated = True
                break
        if not dominated:
            minimal.append(g)
    reduced = []
    for i, g in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1:]
        lm, _ = g.lead()
        tail = Poly(g.field, g.nvars, {k: v for k, v in g.terms.items() if k != lm})
        tail = reduce_poly(tail, others)
        reduced.append(Poly(g.field, g.nvars, {**tail.terms, lm: 1}))
    reduced.sort(key=lambda g: grevlex_key(g.lead()[0]))
    return reduced
