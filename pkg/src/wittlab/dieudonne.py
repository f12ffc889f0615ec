"""Dieudonne complexes modelled as free Z/p^N-modules with explicit precision.

Elements are row vectors; a matrix M acts by x -> x @ M.  ``d[n]`` maps degree
n to degree n+1 and ``F[n]`` is an endomorphism of degree n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .errors import DimensionMismatch, GuardError, PrecisionTooLow
from .linalg import FiniteAbelianPGroup, PresentedGroup, as_rows, left_nullspace, rank, row_basis


def _mat(m, rows: int, cols: int) -> np.ndarray:
    a = np.asarray(m, dtype=np.int64)
    if a.size == 0:
        return np.zeros((rows, cols), dtype=np.int64)
    a = a.reshape(rows, cols) if a.ndim != 2 else a
    if a.shape != (rows, cols):
        raise DimensionMismatch(f"expected a {rows}x{cols} matrix, got {a.shape}")
    return a


class DieudonneComplex:
    def __init__(self, p: int, N: int, ranks, d=None, F=None):
        self.p, self.N = p, N
        self.M = p ** N
        self.ranks = [int(r) for r in ranks]
        top = len(self.ranks)
        d = list(d) if d is not None else []
        d += [None] * (top - len(d))
        self.d = [_mat(d[n] if d[n] is not None else [], self.ranks[n],
                       self.ranks[n + 1] if n + 1 < top else 0) % self.M for n in range(top)]
        F = list(F) if F is not None else [np.eye(r, dtype=np.int64) for r in self.ranks]
        if len(F) != top:
            raise DimensionMismatch("one Frobenius matrix per degree is required")
        self.F = [_mat(F[n], self.ranks[n], self.ranks[n]) % self.M for n in range(top)]
        for n in range(top - 1):
            if ((self.d[n] @ self.d[n + 1]) % self.M).any():
                raise GuardError(f"d o d != 0 in degree {n}")
            # d(F x) = p F(d x)
            if ((self.F[n] @ self.d[n] - self.p * self.d[n] @ self.F[n + 1]) % self.M).any():
                raise GuardError(f"dF != pFd in degree {n}")

    @property
    def degrees(self) -> range:
        return range(len(self.ranks))

    def truncate(self, N2: int) -> "DieudonneComplex":
        if N2 > self.N:
            raise PrecisionTooLow(f"cannot raise precision from {self.N} to {N2}")
        return DieudonneComplex(self.p, N2, self.ranks, self.d, self.F)

    def _sub(self, n: int, gens) -> PresentedGroup:
        g = PresentedGroup(self.p, self.N, self.ranks[n])
        g.add_relations(as_rows(gens, self.ranks[n]))
        return g

    def image_of_F(self, n: int) -> PresentedGroup:
        return self._sub(n, self.F[n])

    def p_divisible_differential(self, n: int) -> PresentedGroup:
        """Submodule {x : dx in p X^(n+1)} of X^n."""
        r = self.ranks[n]
        gens = [self.p * np.eye(r, dtype=np.int64)]
        if r:
            gens.append(left_nullspace(self.d[n] % self.p, self.p).reshape(-1, r))
        return self._sub(n, np.vstack(gens) if r else np.zeros((0, 0), np.int64))


def _same_submodule(a: PresentedGroup, b: PresentedGroup) -> bool:
    rows_a, rows_b = a.relation_rows(), b.relation_rows()
    return all(b.is_zero(v) for v in rows_a) and all(a.is_zero(v) for v in rows_b)


@dataclass
class SaturationReport:
    saturated: bool
    precision: int
    f_injective: list = field(default_factory=list)
    image_matches: list = field(default_factory=list)
    V: list | None = None
    v_precision: int | None = None
    complete_at: int | None = None
    note: str = ""


def _solve_mod(F: np.ndarray, b: np.ndarray, p: int, N: int):
    """Some y with y @ F = b mod p^N, or None."""
    r = F.shape[0]
    big = PresentedGroup(p, N, F.shape[1] + r)
    for i in range(r):
        v = np.zeros(F.shape[1] + r, np.int64)
        v[:F.shape[1]] = F[i]
        v[F.shape[1] + i] = 1
        big.add_relation(v)
    target = np.zeros(F.shape[1] + r, np.int64)
    target[:F.shape[1]] = b
    red = big.reduce(target)
    if red[:F.shape[1]].any():
        return None
    # target - red lies in the row module; its tail records -y up to the reduction
    return (-(red[F.shape[1]:])) % p ** N


def check_saturated(X: DieudonneComplex, precision: int | None = None, completeness_bound: int = 8) -> SaturationReport:
    """F injective and im(F) = {x : p | dx}, decided exactly modulo p^N.

    With every elementary divisor of F strictly below p^N both conditions are
    faithful to the torsion-free module they approximate; otherwise the
    precision is too low to say anything and PrecisionTooLow is raised.
    """
    if precision is not None and precision != X.N:
        X = X.truncate(precision)
    p, N = X.p, X.N
    inj, match = [], []
    worst = 0
    for n in X.degrees:
        r = X.ranks[n]
        if r == 0:
            inj.append(True)
            match.append(True)
            continue
        vals = kern.snf_valuations(X.F[n], p, N)
        if len(vals) < r:
            raise PrecisionTooLow(f"F has an elementary divisor divisible by p^{N} in degree {n}",
                                  degree=n, precision=N)
        worst = max(worst, int(max(vals)))
        inj.append(True)
        match.append(_same_submodule(X.image_of_F(n), X.p_divisible_differential(n)))
    saturated = all(match)
    rep = SaturationReport(saturated, N, inj, match)
    if not saturated:
        return rep
    # V = p F^{-1}; the solution is pinned down modulo p^(N - worst)
    vprec = N - worst
    Vs = []
    for n in X.degrees:
        r = X.ranks[n]
        rows = []
        for i in range(r):
            y = _solve_mod(X.F[n], (p * np.eye(r, dtype=np.int64)[i]) % X.M, p, N)
            if y is None:
                raise GuardError("p X is not inside the image of F although saturated")
            rows.append(y % p ** vprec)
        Vs.append(np.array(rows, dtype=np.int64).reshape(r, r))
    rep.V, rep.v_precision = Vs, vprec
    if vprec > 0:
        mod = p ** vprec
        for n in X.degrees:
            r = X.ranks[n]
            pI = (p * np.eye(r, dtype=np.int64)) % mod
            if ((Vs[n] @ X.F[n]) % mod != pI).any() or ((X.F[n] @ Vs[n]) % mod != pI).any():
                raise GuardError(f"FV = VF = p fails in degree {n}")
        rep.complete_at = _completeness_stage(X, Vs, vprec, completeness_bound)
    rep.note = f"verdict at precision p^{N}; V known modulo p^{vprec}"
    return rep


def _completeness_stage(X: DieudonneComplex, Vs, vprec: int, bound: int):
    """Least k <= bound with V^k X + dV^k X zero modulo p^vprec."""
    mod = X.p ** vprec
    powers = [np.eye(r, dtype=np.int64) for r in X.ranks]
    for k in range(bound + 1):
        zero = True
        for n in X.degrees:
            if (powers[n] % mod).any():
                zero = False
            if n + 1 < len(X.ranks) and ((powers[n] @ X.d[n]) % mod).any():
                zero = False
        if zero:
            return k
        powers = [(P @ V) % mod for P, V in zip(powers, Vs)]
    return None


# ------------------------------------------------------------------ F - 1 modulo p

def ker_coker_F_minus_1_mod_p(X: DieudonneComplex):
    """Per degree (ker, coker) of F - 1 on X^n / p, as elementary abelian groups."""
    p = X.p
    out = []
    for n in X.degrees:
        r = X.ranks[n]
        rk = rank((X.F[n] - np.eye(r, dtype=np.int64)) % p, p) if r else 0
        out.append((FiniteAbelianPGroup.elementary(p, r - rk), FiniteAbelianPGroup.elementary(p, r - rk)))
    return out


@dataclass
class ColimitReport:
    agrees: list
    colimit_of_invariants: list
    invariants_of_colimit: list
    stage: int
    note: str = ""


def _fix_dims(p: int, Fm: np.ndarray, sub: np.ndarray):
    """dim ker and dim coker of F - 1 restricted to an F-stable subspace (rows of sub)."""
    k = sub.shape[0]
    if k == 0:
        return 0, 0
    # coordinates of (F - 1) applied to the basis, in that basis
    imgs = (sub @ Fm - sub) % p
    big = np.vstack([sub, imgs])
    if rank(big, p) != k:
        raise GuardError("subspace is not stable under F")
    coords = np.zeros((k, k), dtype=np.int64)
    from .linalg import solve_left
    for i in range(k):
        coords[i] = solve_left(sub, imgs[i], p)
    rk = rank(coords, p)
    return k - rk, k - rk


def colimit_commutation_test(chain: list[DieudonneComplex], maps) -> ColimitReport:
    """Finite chain X_1 -> ... -> X_k standing in for a filtered colimit.

    The colimit is modelled by the part of the last stage reached from the
    previous one.  Left side: image of ker/coker(F-1) of X_(k-1)/p in those of
    X_k/p.  Right side: ker/coker of F-1 on the image of X_(k-1)/p in X_k/p.
    ``maps[i][n]`` is the degree-n matrix X_(i+1)^n -> X_(i+2)^n.
    """
    if len(maps) != len(chain) - 1:
        raise DimensionMismatch("need one map per consecutive pair")
    p = chain[0].p
    for i, m in enumerate(maps):
        A, B = chain[i], chain[i + 1]
        M = min(A.M, B.M)
        for n in A.degrees:
            f = _mat(m[n], A.ranks[n], B.ranks[n])
            if ((A.F[n] @ f - f @ B.F[n]) % M).any():
                raise GuardError(f"map {i} does not commute with F in degree {n}")
            if n + 1 < len(A.ranks) and ((A.d[n] @ _mat(m[n + 1], A.ranks[n + 1], B.ranks[n + 1])
                                          - f @ B.d[n]) % M).any():
                raise GuardError(f"map {i} does not commute with d in degree {n}")
    if len(chain) == 1:
        res = ker_coker_F_minus_1_mod_p(chain[0])
        dims = [(k.rank, c.rank) for k, c in res]
        return ColimitReport([True] * len(dims), dims, dims, 1, "single stage")
    A, B = chain[-2], chain[-1]
    m = maps[-1]
    agrees, left, right = [], [], []
    for n in B.degrees:
        rA, rB = A.ranks[n], B.ranks[n]
        f = _mat(m[n], rA, rB) % p
        FA = A.F[n] % p
        FB = B.F[n] % p
        # right side
        img = row_basis(f, p) if rA and rB else np.zeros((0, rB), np.int64)
        right_dims = _fix_dims(p, FB, img)
        # left side: kernel of F-1 on A/p pushed forward
        if rA:
            kerA = left_nullspace((FA - np.eye(rA, dtype=np.int64)) % p, p).reshape(-1, rA)
            ker_img = rank((kerA @ f) % p, p) if kerA.shape[0] and rB else 0
        else:
            ker_img = 0
        # coker of F-1 on B/p, image of A/p inside it
        if rB:
            imB = (FB - np.eye(rB, dtype=np.int64)) % p
            coker_img = rank(np.vstack([imB, (f if rA else np.zeros((0, rB), np.int64))]), p) - rank(imB, p)
        else:
            coker_img = 0
        left.append((ker_img, coker_img))
        right.append(right_dims)
        agrees.append(left[-1] == right[-1])
    return ColimitReport(agrees, left, right, len(chain),
                         f"colimit modelled at stage {len(chain)}, precision p^{B.N}")


# ------------------------------------------------------------------ examples

def constant_complex(p: int, N: int, F_scalar: int = 1) -> DieudonneComplex:
    """Z/p^N in degree 0, d = 0, F = multiplication by a scalar."""
    return DieudonneComplex(p, N, [1], [], [[[F_scalar]]])


def witt_shadow(p: int, N: int) -> DieudonneComplex:
    """Degree-0 piece of the de Rham-Witt complex of F_p: W(F_p) = Z_p truncated, F = id."""
    return constant_complex(p, N, 1)
