"""Finite fields GF(p^e) with table arithmetic.

Elements are integers 0..q-1 read as base-p digit vectors: digit i is the
coefficient of alpha^i, where alpha is a root of the chosen modulus.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .errors import CapExceeded, NonPrimePower

MAX_FIELD_ORDER = 1024


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, e) with q = p^e, or raise NonPrimePower."""
    if q < 2:
        raise NonPrimePower(f"{q} is not a prime power", q=q)
    p = 2
    while q % p:
        p += 1
    e = 0
    n = q
    while n % p == 0:
        n //= p
        e += 1
    if n != 1:
        raise NonPrimePower(f"{q} is not a prime power", q=q)
    return p, e


def _polymod_p(a: list[int], m: list[int], p: int) -> list[int]:
    # remainder of a by monic m, coefficient lists low -> high
    a = [x % p for x in a]
    dm = len(m) - 1
    while len(a) - 1 >= dm and any(a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) - 1 < dm:
            break
        c = a[-1]
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _is_irreducible(f: list[int], p: int) -> bool:
    # trial division by monic polynomials of degree <= deg f / 2
    d = len(f) - 1
    for k in range(1, d // 2 + 1):
        for tail in itertools.product(range(p), repeat=k):
            g = list(tail) + [1]
            if not _polymod_p(f, g, p):
                return False
    return True


@lru_cache(maxsize=None)
def least_irreducible(p: int, e: int) -> tuple[int, ...]:
    """Monic irreducible of degree e over F_p with the smallest sum c_i p^i (i < e)."""
    if e == 1:
        return (0, 1)
    for code in range(p ** e):
        tail = [(code // p ** i) % p for i in range(e)]
        f = tail + [1]
        if tail[0] and _is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")  # unreachable


class FiniteField:
    """GF(p^e) with precomputed addition and multiplication tables."""

    def __init__(self, p: int, e: int = 1):
        if not is_prime(p) or e < 1:
            raise NonPrimePower(f"GF({p}^{e}) is not a field", q=p ** max(e, 1))
        q = p ** e
        if q > MAX_FIELD_ORDER:
            raise CapExceeded(f"field order {q} exceeds {MAX_FIELD_ORDER}", q=q)
        self.p, self.e, self.q = p, e, q
        self.modulus = least_irreducible(p, e)
        digits = np.array([[(a // p ** i) % p for i in range(e)] for a in range(q)], dtype=np.int64)
        self._digits = digits
        weights = p ** np.arange(e, dtype=np.int64)
        self.add_table = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
        self.neg_table = ((-digits) % p) @ weights
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                c = self._polymul(digits[a], digits[b])
                mul[a, b] = mul[b, a] = c
        self.mul_table = mul
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.flatnonzero(mul[a] == 1)[0])
        self.inv_table = inv

    def _polymul(self, a, b) -> int:
        p, e = self.p, self.e
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += int(x) * int(y)
        r = _polymod_p(prod, list(self.modulus), p)
        return sum(int(c) * p ** i for i, c in enumerate(r))

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteField) and (self.p, self.e) == (other.p, other.e)

    def __hash__(self) -> int:
        return hash(("GF", self.p, self.e))

    @property
    def generator(self) -> int:
        """The class of x modulo the modulus."""
        return 1 if self.e == 1 else self.p

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return int(self.inv_table[a])

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        r = 1
        while k:
            if k & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            k >>= 1
        return r

    def from_int(self, n: int) -> int:
        """Image of an integer under Z -> F_p -> F_q."""
        return n % self.p

    def to_vec(self, a: int) -> np.ndarray:
        return self._digits[a].copy()

    def from_vec(self, v) -> int:
        return int(sum(int(x) % self.p * self.p ** i for i, x in enumerate(v)))

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    def frobenius_matrix(self) -> np.ndarray:
        """F_p-matrix of x -> x^p acting on coordinate rows (row i = image of alpha^i)."""
        return np.array([self.to_vec(self.frobenius(self.p ** i if self.e > 1 else 1))
                         for i in range(self.e)], dtype=np.int64)

    def elements(self) -> range:
        return range(self.q)

    def format(self, a: int) -> str:
        if self.e == 1:
            return str(a)
        terms = []
        for i, c in enumerate(self._digits[a]):
            if c:
                mono = "1" if i == 0 else ("a" if i == 1 else f"a^{i}")
                terms.append(mono if c == 1 and i else (str(c) if i == 0 else f"{c}*{mono}"))
        return "+".join(terms) if terms else "0"


@lru_cache(maxsize=None)
def GF(q: int) -> FiniteField:
    p, e = prime_power(q)
    return FiniteField(p, e)
