"""Hensel lifting over local Artinian algebras and finite nonunital rings."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .algebra import ArtinAlgebra
from .dsl import parse_polys
from .errors import (DerivativeNotUnit, GuardError, NoConvergence, NoQuasiInverse,
                     NotNilpotent, UnitEnumerationTooLarge)

UNIQUENESS_BOUND = 2 ** 12


class RingPolynomial:
    """Univariate polynomial with coefficients in an algebra; coeffs[k] multiplies x^k."""

    def __init__(self, A: ArtinAlgebra, coeffs):
        self.A = A
        self.coeffs = [np.asarray(c, dtype=np.int64) % A.p for c in coeffs]
        while len(self.coeffs) > 1 and not self.coeffs[-1].any():
            self.coeffs.pop()

    @classmethod
    def parse(cls, A: ArtinAlgebra, text: str, var: str = "x") -> "RingPolynomial":
        if var in A.generators:
            raise GuardError(f"variable {var!r} clashes with a ring generator")
        names = list(A.generators) + [var]
        (f,) = parse_polys(text, A.field, names)
        by_deg: dict[int, dict] = {}
        for exp, c in f.terms.items():
            by_deg.setdefault(exp[-1], {})[exp[:-1]] = c
        from .poly import Poly
        deg = max(by_deg, default=0)
        coeffs = [A.from_poly(Poly(A.field, len(A.generators), by_deg.get(k, {})))
                  for k in range(deg + 1)]
        return cls(A, coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, a) -> np.ndarray:
        A = self.A
        acc = A.zero()
        for c in reversed(self.coeffs):
            acc = A.add(A.mul(acc, a), c)
        return acc

    def derivative(self) -> "RingPolynomial":
        p = self.A.p
        return RingPolynomial(self.A, [(k % p) * c for k, c in enumerate(self.coeffs)][1:] or [self.A.zero()])


def _ideal_nilpotency(A: ArtinAlgebra) -> int:
    """Least k with m^k = 0."""
    from .algebra import ideal_power
    k = 1
    while ideal_power(A, A.maximal_ideal, k).shape[0]:
        k += 1
    return k


@dataclass
class HenselResult:
    root: np.ndarray
    steps: int
    unique: bool | None


def hensel_lift(A: ArtinAlgebra, f: RingPolynomial | str, alpha0, check_unique: bool = True) -> HenselResult:
    """Newton iteration from a simple root modulo the maximal ideal."""
    if isinstance(f, str):
        f = RingPolynomial.parse(A, f)
    if not A.local:
        raise GuardError("hensel_lift needs a local algebra")
    a = np.asarray(alpha0, dtype=np.int64) % A.p
    if not A.in_maximal_ideal(f(a)):
        raise GuardError("f(alpha0) is not in the maximal ideal")
    df = f.derivative()
    if not A.is_unit(df(a)):
        raise DerivativeNotUnit(f"f'({A.format(a)}) is not a unit", alpha0=A.format(a))
    nil = max(2, _ideal_nilpotency(A))
    limit = math.ceil(math.log2(nil)) + 1
    steps = 0
    while True:
        val = f(a)
        if A.is_zero(val):
            break
        if steps > limit:
            raise NoConvergence(f"Newton iteration did not terminate in {limit} steps")
        a = A.sub(a, A.mul(val, A.inverse(df(a))))
        steps += 1
    unique = None
    if check_unique and A.order <= UNIQUENESS_BOUND:
        q = linalg.Quotient(A.n, A.maximal_ideal, A.p)
        base = q.reduce(a)
        roots = [b for b in A.elements() if np.array_equal(q.reduce(b), base) and A.is_zero(f(b))]
        unique = len(roots) == 1
    return HenselResult(a, steps, unique)


def solve_special(A: ArtinAlgebra, s, n: int) -> np.ndarray:
    """x with x - s x^n = 1, for s nilpotent."""
    s = np.asarray(s, dtype=np.int64) % A.p
    if not A.is_nilpotent(s):
        raise NotNilpotent(f"{A.format(s)} is not nilpotent")
    x = A.one()
    for _ in range(A.dim + 2):
        nxt = A.add(A.one(), A.mul(s, A.pow(x, n)))
        if np.array_equal(nxt, x):
            return x
        x = nxt
    raise NoConvergence("fixed-point iteration did not stabilise")


# ------------------------------------------------------------------ nonunital rings

class NonunitalRing:
    """An F_p-subspace of an algebra closed under multiplication.

    Elements are vectors of the ambient algebra.  The unitalization F_p + I is
    handled through pairs (c, x).
    """

    def __init__(self, A: ArtinAlgebra, basis, enum_bound: int = 2 ** 16):
        self.A = A
        self.p = A.p
        self.basis = A.span(linalg.as_rows(basis, A.n) % A.p)
        self.dim = self.basis.shape[0]
        self.enum_bound = enum_bound
        self._quot = linalg.Quotient(A.n, self.basis, A.p)
        for a in self.basis:
            for b in self.basis:
                if not self.contains(A.mul(a, b)):
                    raise GuardError("carrier is not closed under multiplication")

    @classmethod
    def ideal(cls, A: ArtinAlgebra, gens) -> "NonunitalRing":
        return cls(A, A.ideal(gens))

    @property
    def order(self) -> int:
        return self.p ** self.dim

    def contains(self, x) -> bool:
        return self._quot.contains(np.asarray(x, dtype=np.int64) % self.p)

    def elements(self):
        if self.order > self.enum_bound:
            raise UnitEnumerationTooLarge(f"|I| = {self.order} exceeds {self.enum_bound}")
        for c in itertools.product(range(self.p), repeat=self.dim):
            yield (np.array(c, dtype=np.int64) @ self.basis) % self.p if self.dim else self.A.zero()

    def mul(self, a, b) -> np.ndarray:
        return self.A.mul(a, b)

    def is_nilpotent(self) -> bool:
        """I^k = 0 for some k (checked through powers of the carrier)."""
        cur = self.basis
        for _ in range(self.A.dim + 1):
            if cur.shape[0] == 0:
                return True
            cur = self.A.span(np.array([self.A.mul(a, b) for a in cur for b in self.basis]))
        return cur.shape[0] == 0

    def check_axioms(self) -> bool:
        """Commutativity and associativity on all basis triples."""
        A = self.A
        for a in self.basis:
            for b in self.basis:
                if not np.array_equal(A.mul(a, b), A.mul(b, a)):
                    return False
                for c in self.basis:
                    if not np.array_equal(A.mul(A.mul(a, b), c), A.mul(a, A.mul(b, c))):
                        return False
        return True


def quasi_inverse(I: NonunitalRing, x) -> np.ndarray:
    """y in I with x + y + xy = 0."""
    A = I.A
    x = np.asarray(x, dtype=np.int64) % I.p
    if I.dim == 0:
        if x.any():
            raise NoQuasiInverse("element not in the carrier", witness=A.format(x))
        return A.zero()
    M = np.array([A.add(b, A.mul(b, x)) for b in I.basis])
    c = linalg.solve_left(M, A.neg(x), I.p)
    if c is None:
        raise NoQuasiInverse(f"{A.format(x)} has no quasi-inverse", witness=A.format(x))
    return (c @ I.basis) % I.p


def is_local(I: NonunitalRing) -> bool:
    for x in I.elements():
        try:
            quasi_inverse(I, x)
        except NoQuasiInverse:
            return False
    return True


def _unital_mul(A: ArtinAlgebra, u, v):
    (c, x), (d, y) = u, v
    p = A.p
    return ((c * d) % p, A.add(A.add((c * y) % p, (d * x) % p), A.mul(x, y)))


def localize_nonunital(I: NonunitalRing) -> NonunitalRing:
    """I[(1+I)^-1] as the subring e*I, e the idempotent absorbing all of 1+I.

    Inverting s in a finite ring keeps exactly the part where s is a unit, cut
    out by the idempotent power of s; the product of these idempotents over
    s in 1+I is e, and the augmentation kernel of the localized unitalization
    is e*I.
    """
    A = I.A
    e = (1, A.zero())
    for x in I.elements():
        s = (1, x)
        # idempotent power of s
        powers = [s]
        cur = s
        while True:
            cur = _unital_mul(A, cur, s)
            if any(cur[0] == q[0] and np.array_equal(cur[1], q[1]) for q in powers):
                break
            powers.append(cur)
        idem = next(q for q in powers
                    if (lambda sq: sq[0] == q[0] and np.array_equal(sq[1], q[1]))(_unital_mul(A, q, q)))
        e = _unital_mul(A, e, idem)
    j = e[1]
    basis = [A.add(b, A.mul(j, b)) for b in I.basis]
    return NonunitalRing(A, np.array(basis).reshape(-1, A.n) if basis else np.zeros((0, A.n), np.int64))


@dataclass
class HenselVerdict:
    verdict: str                  # "henselian within bounds", "not henselian", "inconclusive"
    checked: int
    witness: dict | None = None


def is_henselian_bounded(I: NonunitalRing, n_max: int = 3, deg_max: int = 1,
                         budget: int = 200_000) -> HenselVerdict:
    """Solvability of x(1+x)^(n-1) + g(x) = 0 in I for n <= n_max, deg g <= deg_max."""
    A = I.A
    if I.dim == 0:
        return HenselVerdict("henselian within bounds", 0)
    elems = list(I.elements())
    checked = 0
    truncated = False
    for n in range(1, n_max + 1):
        lhs_cache = [A.mul(x, A.pow(A.add(A.one(), x), n - 1)) if n > 1 else x for x in elems]
        for coeffs in itertools.product(range(len(elems)), repeat=deg_max + 1):
            if checked * len(elems) > budget:
                truncated = True
                break
            checked += 1
            g = [elems[k] for k in coeffs]
            ok = False
            for x, base in zip(elems, lhs_cache):
                val = base
                xp = None
                for k, c in enumerate(g):
                    xp = x if k == 1 else (A.mul(xp, x) if k > 1 else None)
                    term = c if k == 0 else A.mul(c, xp)
                    val = A.add(val, term)
                if not val.any():
                    ok = True
                    break
            if not ok:
                return HenselVerdict("not henselian", checked,
                                     {"n": n, "g": [A.format(c) for c in g]})
        if truncated:
            break
    return HenselVerdict("inconclusive" if truncated else "henselian within bounds", checked)
