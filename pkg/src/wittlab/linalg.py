"""Linear algebra over F_p and finite abelian p-groups presented over Z/p^K.

Row-vector convention throughout: a map F_p^m -> F_p^n is an (m, n) matrix
whose row i is the image of the i-th domain basis vector, and x maps to x @ M.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels as kern
from .errors import DimensionMismatch


# ------------------------------------------------------------------ F_p spaces

def as_rows(a, n: int) -> np.ndarray:
    """View a as a stack of length-n rows (works for empty input and n = 0)."""
    a = np.asarray(a, dtype=np.int64)
    if a.size == 0:
        rows = a.shape[0] if a.ndim == 2 and a.shape[1] == n else 0
        return np.zeros((rows, n), dtype=np.int64)
    return a.reshape(-1, n)


def rref(A, p: int):
    """Reduced row echelon form mod p and the pivot columns (bit-packed when p = 2)."""
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise DimensionMismatch("expected a matrix")
    m, n = A.shape
    if m == 0 or n == 0:
        return A.reshape(m, n) % p, np.zeros(0, dtype=np.int64)
    if p == 2:
        W, piv = kern.rref_gf2_packed(kern.pack_gf2(A), n)
        return kern.unpack_gf2(W, n), piv
    return kern.rref_modp(A, p)


def rank(A, p: int) -> int:
    return len(rref(A, p)[1])


def row_basis(A, p: int) -> np.ndarray:
    R, piv = rref(A, p)
    return R[: len(piv)]


def right_nullspace(A, p: int) -> np.ndarray:
    """Rows spanning {x : A @ x = 0}."""
    A = np.asarray(A, dtype=np.int64)
    m, n = A.shape
    R, piv = rref(A, p) if m else (np.zeros((0, n), np.int64), np.zeros(0, np.int64))
    pivset = set(int(c) for c in piv)
    free = [c for c in range(n) if c not in pivset]
    out = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        out[k, f] = 1
        for r, c in enumerate(piv):
            out[k, c] = (-R[r, f]) % p
    return out


def left_nullspace(M, p: int) -> np.ndarray:
    """Rows x with x @ M = 0."""
    M = np.asarray(M, dtype=np.int64)
    return right_nullspace(M.T.copy(), p)


def solve_left(M, b, p: int):
    """Some x with x @ M = b (mod p), or None."""
    M = np.asarray(M, dtype=np.int64)
    m, n = M.shape
    aug = np.concatenate([M.T, np.asarray(b, dtype=np.int64).reshape(n, 1)], axis=1)
    R, piv = rref(aug, p)
    if len(piv) and piv[-1] == m:
        return None
    x = np.zeros(m, dtype=np.int64)
    for r, c in enumerate(piv):
        x[c] = R[r, m]
    return x % p


class Quotient:
    """The quotient F_p^n / span(sub) with canonical representatives."""

    def __init__(self, n: int, sub, p: int):
        self.n, self.p = n, p
        sub = as_rows(sub, n)
        if sub.shape[0]:
            R, piv = rref(sub, p)
            self.rows = R[: len(piv)]
            self.pivots = [int(c) for c in piv]
        else:
            self.rows = np.zeros((0, n), dtype=np.int64)
            self.pivots = []
        pset = set(self.pivots)
        self.free = [c for c in range(n) if c not in pset]
        self.dim = len(self.free)

    def reduce(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64) % self.p
        if v.ndim == 1:
            for r, c in enumerate(self.pivots):
                if v[c]:
                    v = (v - v[c] * self.rows[r]) % self.p
            return v
        v = v.copy()
        for r, c in enumerate(self.pivots):
            col = v[:, c].copy()
            sel = np.flatnonzero(col)
            if sel.size:
                v[sel] = (v[sel] - np.outer(col[sel], self.rows[r])) % self.p
        return v

    def coords(self, v) -> np.ndarray:
        """Coordinates in the quotient basis given by the free columns."""
        red = self.reduce(v)
        return red[..., self.free]

    def lift(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64)
        out = np.zeros(coords.shape[:-1] + (self.n,), dtype=np.int64)
        out[..., self.free] = coords % self.p
        return out

    def contains(self, v) -> bool:
        return not self.reduce(v).any()


# ------------------------------------------------------------------ groups

@dataclass(frozen=True)
class FiniteAbelianPGroup:
    """A finite abelian p-group recorded by its invariant factors, largest first."""

    p: int
    invariant_factors: tuple[int, ...] = ()
    generators: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        facs = tuple(sorted((int(f) for f in self.invariant_factors if f != 1), reverse=True))
        for f in facs:
            g = f
            while g % self.p == 0:
                g //= self.p
            if g != 1:
                raise ValueError(f"{f} is not a power of {self.p}")
        object.__setattr__(self, "invariant_factors", facs)

    @classmethod
    def elementary(cls, p: int, rank: int, generators=None) -> "FiniteAbelianPGroup":
        return cls(p, (p,) * rank, generators)

    @classmethod
    def trivial(cls, p: int) -> "FiniteAbelianPGroup":
        return cls(p, ())

    @classmethod
    def cyclic(cls, p: int, order: int) -> "FiniteAbelianPGroup":
        return cls(p, (order,))

    @property
    def order(self) -> int:
        out = 1
        for f in self.invariant_factors:
            out *= f
        return out

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def exponent(self) -> int:
        return self.invariant_factors[0] if self.invariant_factors else 1

    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def to_list(self) -> list[int]:
        return list(self.invariant_factors)

    def __str__(self) -> str:
        if not self.invariant_factors:
            return "0"
        return " + ".join(f"Z/{f}" for f in self.invariant_factors)


def group_from_counts(p: int, sizes: Sequence[int]) -> FiniteAbelianPGroup:
    """Invariant factors from |p^j H| for j = 0, 1, ... (ending in 1)."""
    facs = []
    logs = [int(round(np.log(s) / np.log(p))) if s > 1 else 0 for s in sizes]
    logs = list(logs) + [0]
    # number of cyclic factors of order >= p^(j+1) is log|p^j H| - log|p^(j+1) H|
    at_least = [logs[j] - logs[j + 1] for j in range(len(logs) - 1)]
    for j in range(len(at_least)):
        nxt = at_least[j + 1] if j + 1 < len(at_least) else 0
        facs.extend([p ** (j + 1)] * (at_least[j] - nxt))
    return FiniteAbelianPGroup(p, tuple(facs))


class PresentedGroup:
    """(Z/p^K)^n modulo a submodule kept in Howell form; a finite abelian p-group."""

    def __init__(self, p: int, K: int, n: int, relations=None):
        self.p, self.K, self.n = p, K, n
        self.M = p ** K
        self.rows = np.zeros((n, n), dtype=np.int64)
        self.has = np.zeros(n, dtype=np.bool_)
        self.val = np.zeros(n, dtype=np.int64)
        self._inv = None
        if relations is not None:
            self.add_relations(relations)

    def copy(self) -> "PresentedGroup":
        g = PresentedGroup.__new__(PresentedGroup)
        g.p, g.K, g.n, g.M = self.p, self.K, self.n, self.M
        g.rows, g.has, g.val = self.rows.copy(), self.has.copy(), self.val.copy()
        g._inv = self._inv
        return g

    def add_relation(self, v) -> bool:
        v = np.asarray(v, dtype=np.int64)
        if not (v % self.M).any():
            return False
        grew = bool(kern.howell_insert(self.rows, self.has, self.val, v % self.M, self.p, self.K))
        if grew:
            self._inv = None
        return grew

    def add_relations(self, vs) -> int:
        vs = as_rows(vs, self.n)
        return sum(1 for v in vs if self.add_relation(v))

    def reduce(self, v) -> np.ndarray:
        return kern.howell_reduce(self.rows, self.has, self.val,
                                  np.asarray(v, dtype=np.int64) % self.M, self.p, self.K)

    def is_zero(self, v) -> bool:
        return not self.reduce(v).any()

    def relation_rows(self) -> np.ndarray:
        return self.rows[self.has]

    @property
    def log_order(self) -> int:
        return int(self.K * self.n - np.sum(self.K - self.val[self.has]))

    @property
    def order(self) -> int:
        return self.p ** self.log_order

    def invariants(self) -> FiniteAbelianPGroup:
        if self._inv is None:
            rel = self.relation_rows()
            vals = kern.snf_valuations(rel, self.p, self.K) if rel.shape[0] else np.zeros(0, np.int64)
            facs = [self.p ** int(e) for e in vals if e > 0]
            facs += [self.M] * (self.n - len(vals))
            self._inv = FiniteAbelianPGroup(self.p, tuple(facs))
        return self._inv

    def subgroup_log_order(self, gens) -> int:
        """log_p of the order of the subgroup generated by the classes of gens."""
        g = self.copy()
        g.add_relations(gens)
        return self.log_order - g.log_order

    def subgroup_invariants(self, gens) -> FiniteAbelianPGroup:
        gens = as_rows(gens, self.n)
        sizes = []
        for j in range(self.K + 1):
            sizes.append(self.p ** self.subgroup_log_order((gens * self.p ** j) % self.M))
        return group_from_counts(self.p, sizes)

    def contains_all(self, gens, sub_gens) -> bool:
        """Whether every class in gens lies in the subgroup generated by sub_gens."""
        g = self.copy()
        g.add_relations(sub_gens)
        return all(g.is_zero(v) for v in as_rows(gens, self.n))


def hom_kernel(src: PresentedGroup, dst: PresentedGroup, images) -> np.ndarray:
    """Vectors of the source ambient spanning the kernel of a homomorphism.

    ``images[i]`` is the image (in the target ambient) of the i-th source
    generator.  Returned rows generate the kernel modulo the source relations.
    """
    p = src.p
    K = max(src.K, dst.K)
    M = p ** K
    n1, n2 = src.n, dst.n
    images = np.asarray(images, dtype=np.int64).reshape(n1, n2)
    big = PresentedGroup(p, K, n2 + n1)
    lift = p ** (K - dst.K)
    # target relations, scaled into the common modulus
    for r in dst.relation_rows():
        v = np.zeros(n2 + n1, np.int64)
        v[:n2] = r * lift
        big.add_relation(v)
    if dst.K < K:
        for j in range(n2):
            v = np.zeros(n2 + n1, np.int64)
            v[j] = p ** dst.K * lift
            big.add_relation(v % M)
    for i in range(n1):
        v = np.zeros(n2 + n1, np.int64)
        v[:n2] = images[i] * lift
        v[n2 + i] = p ** (K - src.K)
        big.add_relation(v % M)
    kern_rows = big.rows[n2:][big.has[n2:]]
    out = kern_rows[:, n2:] // p ** (K - src.K)
    return out % src.M


def hom_image_gens(images) -> np.ndarray:
    return np.asarray(images, dtype=np.int64)


# ------------------------------------------------------------------ linear maps

class KerCoker(NamedTuple):
    kernel: FiniteAbelianPGroup
    kernel_basis: np.ndarray
    cokernel: FiniteAbelianPGroup
    cokernel_basis: np.ndarray


@dataclass
class FpLinearMap:
    """An F_p-linear map between labelled bases; row i is the image of domain_basis[i]."""

    p: int
    matrix: np.ndarray
    domain_basis: list = None
    codomain_basis: list = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.int64)
        if self.matrix.ndim != 2:
            raise DimensionMismatch("matrix must be two-dimensional")
        m, n = self.matrix.shape
        if self.domain_basis is None:
            self.domain_basis = list(range(m))
        if self.codomain_basis is None:
            self.codomain_basis = list(range(n))
        if len(self.domain_basis) != m or len(self.codomain_basis) != n:
            raise DimensionMismatch(
                f"matrix is {m}x{n} but bases have {len(self.domain_basis)} and "
                f"{len(self.codomain_basis)} elements")
        self.matrix %= self.p

    def __call__(self, v) -> np.ndarray:
        return (np.asarray(v, dtype=np.int64) @ self.matrix) % self.p

    @property
    def rank(self) -> int:
        return rank(self.matrix, self.p) if self.matrix.size else 0


def kernel_cokernel(f: FpLinearMap) -> KerCoker:
    """Kernel and cokernel of an F_p-linear map, with representative vectors."""
    p = f.p
    m, n = f.matrix.shape
    kb = left_nullspace(f.matrix, p) if m else np.zeros((0, 0), np.int64)
    kb = as_rows(kb, m)
    img = Quotient(n, f.matrix, p)
    cb = np.zeros((img.dim, n), dtype=np.int64)
    for k, c in enumerate(img.free):
        cb[k, c] = 1
    if kb.shape[0] + len(img.pivots) != m:
        raise AssertionError("rank-nullity violated")
    return KerCoker(FiniteAbelianPGroup.elementary(p, kb.shape[0]), kb,
                    FiniteAbelianPGroup.elementary(p, img.dim), cb)
