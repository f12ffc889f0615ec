"""Weights of 2-forms and the obstruction family for continuity of K_2 along t-adic towers.

Two kinds of 2-forms live here:

* ``TwoForm``: an alternating form on F_p^dim, stored as an antisymmetric
  matrix.  Its weight (fewest decomposable summands) is bounded below by half
  the rank of the interior-product map, and for small spaces it is also found
  by exhaustive search.
* ``SymbolicTwoForm``: a 2-form in du_a ^ du_b over a polynomial ring
  F_p[u_1..u_M] (optionally with t), standing in for a field with a large
  p-basis.  Its rank is taken over the fraction field by fraction-free
  elimination.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .dsl import parse_polys
from .errors import ExactSearchInfeasible, GuardError, SymbolicRankBudget
from .fields import GF, FiniteField
from .linalg import rank
from .poly import Poly

EXACT_DIM_LIMIT = 6
EXACT_FIELDS = (2, 3)


# ------------------------------------------------------------------ forms over F_p

class TwoForm:
    """Alternating form on F_p^dim; ``matrix[a, b]`` is the coefficient of e_a ^ e_b (a < b)."""

    def __init__(self, p: int, dim: int, matrix=None):
        self.p, self.dim = p, dim
        M = np.zeros((dim, dim), dtype=np.int64) if matrix is None else np.asarray(matrix, dtype=np.int64) % p
        upper = np.triu(M, 1)
        self.matrix = (upper - upper.T) % p

    @classmethod
    def from_terms(cls, p: int, dim: int, terms) -> "TwoForm":
        """Sum of c * (u ^ v) over (c, u, v) with u, v vectors."""
        M = np.zeros((dim, dim), dtype=np.int64)
        for c, u, v in terms:
            u = np.asarray(u, dtype=np.int64)
            v = np.asarray(v, dtype=np.int64)
            M = (M + c * (np.outer(u, v) - np.outer(v, u))) % p
        return cls(p, dim, M)

    @classmethod
    def basis_sum(cls, p: int, dim: int, pairs) -> "TwoForm":
        """Sum of e_a ^ e_b over (a, b) index pairs."""
        eye = np.eye(dim, dtype=np.int64)
        return cls.from_terms(p, dim, [(1, eye[a], eye[b]) for a, b in pairs])

    def coords(self) -> tuple:
        iu = np.triu_indices(self.dim, 1)
        return tuple(int(x) for x in self.matrix[iu])

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.p, self.dim, self.matrix + other.matrix)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(self.p, self.dim, self.matrix - other.matrix)

    def __eq__(self, other) -> bool:
        return isinstance(other, TwoForm) and self.p == other.p and np.array_equal(self.matrix, other.matrix)

    def is_zero(self) -> bool:
        return not self.matrix.any()

    def interior_product_matrix(self) -> np.ndarray:
        """f_omega: V^dual -> V; row a is the image of the dual basis vector e_a^*.

        e_a^* contracted with x ^ y gives <e_a, x> y - <e_a, y> x, so the image
        of e_a^* is row a of the antisymmetric matrix.
        """
        return self.matrix.copy()


def interior_rank(form: TwoForm) -> int:
    return rank(form.interior_product_matrix(), form.p) if form.dim else 0


@lru_cache(maxsize=16)
def _decomposables(p: int, dim: int) -> frozenset:
    """Coordinates of every nonzero x ^ y in F_p^dim."""
    vecs = np.array(list(itertools.product(range(p), repeat=dim)), dtype=np.int64)
    iu = np.triu_indices(dim, 1)
    out = set()
    for x in vecs:
        w = (x[iu[0]] * vecs[:, iu[1]] - x[iu[1]] * vecs[:, iu[0]]) % p
        for row in np.unique(w, axis=0):
            if row.any():
                out.add(tuple(int(c) for c in row))
    return frozenset(out)


def symplectic_decomposition(form: TwoForm) -> list:
    """Explicit summands (u, v) with form = sum u ^ v, obtained by eliminating pivot pairs."""
    p = form.p
    M = form.matrix.copy()
    out = []
    while M.any():
        i, j = (int(x) for x in np.argwhere(M)[0])
        c = int(M[i, j])
        a = M[i].copy()
        b = M[j].copy()
        inv = pow(c, -1, p)
        u = (a * inv) % p
        M = (M - inv * (np.outer(a, b) - np.outer(b, a))) % p
        out.append((u, b % p))
    return out


def exact_weight(form: TwoForm) -> int:
    """Least number of decomposable summands, by search over decomposables.

    Levels 0, 1 and 2 are decided by exhaustive membership tests; beyond that
    an explicit decomposition supplies the witness and the exhaustive test
    at the previous level supplies minimality.
    """
    p, dim = form.p, form.dim
    if p not in EXACT_FIELDS or dim > EXACT_DIM_LIMIT:
        raise ExactSearchInfeasible(f"exact search limited to dim <= {EXACT_DIM_LIMIT} over F_2, F_3")
    if form.is_zero():
        return 0
    D = _decomposables(p, dim)
    target = form.coords()
    if target in D:
        return 1
    tv = np.array(target, dtype=np.int64)
    for d in D:
        if tuple(int(c) for c in (tv - np.array(d)) % p) in D:
            return 2
    witness = symplectic_decomposition(form)
    if TwoForm.from_terms(p, dim, [(1, u, v) for u, v in witness]) != form:
        raise GuardError("symplectic decomposition does not reproduce the form")
    if len(witness) == 3:
        return 3
    # above 3 the search would need deeper layers; only dims > 6 reach this
    raise ExactSearchInfeasible("weight above 3 needs a deeper search")


@dataclass
class WeightResult:
    lower_bound: int
    exact: int | None
    rank: int


def weight(form: TwoForm, exact: bool = True) -> WeightResult:
    rk = interior_rank(form)
    lb = (rk + 1) // 2
    ex = None
    if exact and form.p in EXACT_FIELDS and form.dim <= EXACT_DIM_LIMIT:
        ex = exact_weight(form)
    return WeightResult(lb, ex, rk)


# ------------------------------------------------------------------ symbolic forms

def _exact_div(f: Poly, g: Poly) -> Poly:
    """f / g when g divides f exactly (multivariate, by leading terms)."""
    F = f.field
    q = Poly(F, f.nvars)
    r = f
    gm, gc = g.lead()
    ginv = F.inv(gc)
    while r:
        m, c = r.lead()
        if any(a < b for a, b in zip(m, gm)):
            raise GuardError("inexact polynomial division")
        shift = tuple(a - b for a, b in zip(m, gm))
        coef = F.mul(c, ginv)
        q = q + Poly(F, f.nvars, {shift: coef})
        r = r - g.scale(coef, shift)
    return q


def fraction_free_rank(M: list[list[Poly]], budget: int = 200_000) -> int:
    """Rank over the fraction field by Bareiss elimination (entries stay polynomial)."""
    rows = [list(r) for r in M]
    if not rows:
        return 0
    ncols = len(rows[0])
    F = rows[0][0].field if ncols else None
    nv = rows[0][0].nvars if ncols else 0
    one = Poly.constant(F, nv, 1) if ncols else None
    prev = one
    rk = 0
    work = 0
    for c in range(ncols):
        piv = next((i for i in range(rk, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        pr = rows[rk]
        for i in range(rk + 1, len(rows)):
            ri = rows[i]
            a = ri[c]
            new = []
            for k in range(ncols):
                val = pr[c] * ri[k] - a * pr[k]
                if val:
                    val = _exact_div(val, prev)
                new.append(val)
                work += len(val.terms)
            if work > budget:
                raise SymbolicRankBudget(f"fraction-free elimination exceeded {budget} term operations")
            rows[i] = new
        prev = pr[c]
        rk += 1
    return rk


class SymbolicTwoForm:
    """sum over a < b of coeffs[(a, b)] du_a ^ du_b, coefficients in F_p[vars]."""

    def __init__(self, field: FiniteField, names, nforms: int, coeffs=None):
        self.field = field
        self.names = list(names)
        self.nforms = nforms          # number of du's (the first nforms variables)
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v}

    def zero_like(self) -> "SymbolicTwoForm":
        return SymbolicTwoForm(self.field, self.names, self.nforms)

    def __add__(self, other: "SymbolicTwoForm") -> "SymbolicTwoForm":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return SymbolicTwoForm(self.field, self.names, self.nforms, out)

    def __sub__(self, other: "SymbolicTwoForm") -> "SymbolicTwoForm":
        return self + other.scale_poly(Poly.constant(self.field, len(self.names), self.field.neg(1)))

    def scale_poly(self, c: Poly) -> "SymbolicTwoForm":
        return SymbolicTwoForm(self.field, self.names, self.nforms,
                               {k: v * c for k, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def drop_forms(self, killed) -> "SymbolicTwoForm":
        """Image after setting du_a = 0 for a in killed (relative differentials)."""
        killed = set(killed)
        return SymbolicTwoForm(self.field, self.names, self.nforms,
                               {k: v for k, v in self.coeffs.items() if not (set(k) & killed)})

    def matrix(self) -> list[list[Poly]]:
        nv = len(self.names)
        z = Poly(self.field, nv)
        M = [[z] * self.nforms for _ in range(self.nforms)]
        for (a, b), v in self.coeffs.items():
            M[a][b] = v
            M[b][a] = -v
        return M

    def interior_rank(self, budget: int = 200_000) -> int:
        return fraction_free_rank(self.matrix(), budget)

    def weight_lower_bound(self, budget: int = 200_000) -> int:
        return (self.interior_rank(budget) + 1) // 2

    def format(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for (a, b) in sorted(self.coeffs):
            c = self.coeffs[(a, b)].format(self.names)
            parts.append(f"({c})*d{self.names[a]}^d{self.names[b]}")
        return " + ".join(parts)


def _d(f: Poly, nforms: int) -> list[Poly]:
    """Partial derivatives along the first nforms variables (t, if present, is held constant)."""
    return [f.derivative(a) for a in range(nforms)]


def _wedge_one_forms(field, names, nforms, u: list[Poly], v: list[Poly]) -> SymbolicTwoForm:
    out = {}
    for a in range(nforms):
        for b in range(a + 1, nforms):
            c = u[a] * v[b] - u[b] * v[a]
            if c:
                out[(a, b)] = c
    return SymbolicTwoForm(field, names, nforms, out)


def _truncate_t(f: Poly, t_index: int, s: int) -> Poly:
    return Poly(f.field, f.nvars, {m: c for m, c in f.terms.items() if m[t_index] < s})


def _t_coefficient(f: Poly, t_index: int, i: int) -> Poly:
    out = {}
    for m, c in f.terms.items():
        if m[t_index] == i:
            mm = list(m)
            mm[t_index] = 0
            out[tuple(mm)] = c
    return Poly(f.field, f.nvars, out)


def expand_e(terms, base_vars, s: int, p: int = 2, t: str = "t") -> list[SymbolicTwoForm]:
    """t-adic coefficients tau_0..tau_(s-1) of e(sum c * df ^ dg) over k[t]/(t^s).

    ``terms`` is a list of (c, f, g) polynomial strings in base_vars and t;
    e differentiates along the base variables only and drops dt.
    """
    field = GF(p)
    names = list(base_vars) + [t]
    M = len(base_vars)
    ti = M
    total = SymbolicTwoForm(field, names, M)
    for c, f, g in terms:
        cp, fp, gp = parse_polys(f"{c}, {f}, {g}", field, names)
        w = _wedge_one_forms(field, names, M, _d(fp, M), _d(gp, M)).scale_poly(cp)
        total = total + w
    return split_t(total, ti, s)


def split_t(form: SymbolicTwoForm, t_index: int, s: int) -> list[SymbolicTwoForm]:
    out = []
    for i in range(s):
        co = {}
        for k, v in form.coeffs.items():
            c = _t_coefficient(v, t_index, i)
            if c:
                co[k] = c
        out.append(SymbolicTwoForm(form.field, form.names, form.nforms, co))
    return out


# ------------------------------------------------------------------ the obstruction family

def _series_inverse(u: Poly, t_index: int, s: int) -> Poly:
    """1/u modulo t^s for u = 1 + (multiple of t)."""
    one = Poly.constant(u.field, u.nvars, 1)
    x = one - u
    acc, powr = one, one
    for _ in range(s):
        powr = _truncate_t(powr * x, t_index, s)
        if not powr:
            break
        acc = acc + powr
    return _truncate_t(acc, t_index, s)


def dlog_wedge_e(field, names, nforms, t_index, u: Poly, v: Poly, s: int) -> SymbolicTwoForm:
    """e(dlog u ^ dlog v) modulo t^s."""
    iu, iv = _series_inverse(u, t_index, s), _series_inverse(v, t_index, s)
    w = _wedge_one_forms(field, names, nforms, _d(u, nforms), _d(v, nforms))
    scale = _truncate_t(iu * iv, t_index, s)
    return SymbolicTwoForm(field, names, nforms,
                           {k: _truncate_t(c * scale, t_index, s) for k, c in w.coeffs.items()
                            if _truncate_t(c * scale, t_index, s)})


@dataclass
class StageReport:
    j: int
    coefficient_index: int
    weight_target: int
    congruence_holds: bool
    relative_weight_bound: int
    absolute_weight_bound: int
    lifting_bound_per_N: int
    min_N: int


@dataclass
class BEKReport:
    p: int
    weights: list
    stage: int
    variables: list
    stages: list = field(default_factory=list)
    growth: list = field(default_factory=list)
    coefficients: list = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"p": self.p, "weights": self.weights, "stage": self.stage,
                "variables": self.variables,
                "stages": [s.__dict__ for s in self.stages], "growth": self.growth,
                "note": "finite stages only; no statement about the limit is made"}


def bek_family(p: int, weights, stage: int, budget: int = 200_000) -> BEKReport:
    """Symbols f = sum_j sum_{i <= w_j} {1 + t^j b_i^(j), 1 + t^j c_i^(j)} for j < stage.

    The expansion is carried to t^(2 stage - 1) so that the coefficient
    tau_(2j) of every included symbol is visible.  For each j the report
    checks tau_(2j) == sum_i db_i^(j) ^ dc_i^(j) after killing the
    differentials of earlier variables, and bounds the weight of tau_(2j)
    (absolute and relative) through the interior-product rank.
    """
    weights = list(weights)
    if any(b <= a for a, b in zip(weights, weights[1:])) or any(w <= 0 for w in weights):
        raise GuardError("weights must be positive and strictly increasing")
    js = list(range(1, min(stage, len(weights) + 1)))
    field_ = GF(p)
    names, groups = [], {}
    for j in js:
        idx = []
        for i in range(1, weights[j - 1] + 1):
            idx.append((len(names), len(names) + 1))
            names += [f"b{j}_{i}", f"c{j}_{i}"]
        groups[j] = idx
    M = len(names)
    names_t = names + ["t"]
    ti = M
    prec = 2 * (js[-1] if js else 0) + 1
    nv = M + 1
    one = Poly.constant(field_, nv, 1)
    total = SymbolicTwoForm(field_, names_t, M)
    for j in js:
        tj = Poly(field_, nv, {tuple([0] * M + [j]): 1})
        for (bi, ci) in groups[j]:
            u = one + tj * Poly.var(field_, nv, bi)
            v = one + tj * Poly.var(field_, nv, ci)
            total = total + dlog_wedge_e(field_, names_t, M, ti, u, v, prec)
    taus = split_t(total, ti, prec)
    rep = BEKReport(p, weights, stage, names, coefficients=taus)
    earlier: list[int] = []
    for j in js:
        tau = taus[2 * j]
        expected = SymbolicTwoForm(field_, names_t, M, {(b, c): one for b, c in groups[j]})
        rel = tau.drop_forms(earlier)
        cong = (rel - expected).drop_forms(earlier).is_zero()
        rb = rel.weight_lower_bound(budget)
        ab = tau.weight_lower_bound(budget)
        per_N = comb(2 * j + 2, 2 * j)
        rep.stages.append(StageReport(j, 2 * j, weights[j - 1], cong, rb, ab, per_N, -(-ab // per_N)))
        earlier += [x for pair in groups[j] for x in pair]
    rep.growth = [{"coefficient": s.coefficient_index, "weight_bound": s.absolute_weight_bound,
                   "binomial": s.lifting_bound_per_N} for s in rep.stages]
    return rep
