"""Finite windows of towers of finite abelian p-groups and convergence detectors.

Every verdict is relative to the window A_1 <- A_2 <- ... <- A_W it was
computed on.  Nothing is extrapolated past A_W: when the window is too short
to decide, the verdict says "inconclusive".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, GuardError, ParseError
from .linalg import FiniteAbelianPGroup, PresentedGroup, as_rows, hom_kernel

PRO_ZERO = "pro-zero within window"
NOT_PRO_ZERO = "not pro-zero within window"
ML = "Mittag-Leffler within window"
QC = "quickly converging within window"
INCONCLUSIVE = "inconclusive"


def _exp(f: int, p: int) -> int:
    e = 0
    while f > 1:
        f //= p
        e += 1
    return e


class GroupTower:
    """Window of a tower; ``transitions[i]`` maps groups[i+1] -> groups[i].

    Groups are given by invariant factors; element coordinates are with
    respect to the standard cyclic generators.  A transition matrix has one
    row per generator of the source, holding its image in target coordinates.
    """

    def __init__(self, p: int, groups, transitions):
        self.p = p
        self.groups = [g if isinstance(g, FiniteAbelianPGroup) else FiniteAbelianPGroup(p, tuple(g))
                       for g in groups]
        if len(self.groups) < 2:
            raise GuardError("a tower window needs at least two groups")
        if len(transitions) != len(self.groups) - 1:
            raise DimensionMismatch("need one transition per consecutive pair")
        self.K = max([_exp(f, p) for g in self.groups for f in g.invariant_factors] + [1])
        self.transitions = []
        for i, t in enumerate(transitions):
            src, dst = self.groups[i + 1], self.groups[i]
            m = as_rows(np.asarray(t, dtype=np.int64), len(dst.invariant_factors))
            if m.shape[0] != len(src.invariant_factors):
                raise DimensionMismatch(f"transition {i} has {m.shape[0]} rows, expected "
                                        f"{len(src.invariant_factors)}")
            self.transitions.append(m)
        self._pres = [self._presented(g) for g in self.groups]
        for i, m in enumerate(self.transitions):
            src = self.groups[i + 1]
            for j, f in enumerate(src.invariant_factors):
                if not self._pres[i].is_zero(f * m[j]):
                    raise GuardError(f"transition {i} is not a homomorphism (generator {j})")

    @property
    def window(self) -> int:
        return len(self.groups)

    def _presented(self, g: FiniteAbelianPGroup) -> PresentedGroup:
        n = len(g.invariant_factors)
        rels = np.diag(np.array(g.invariant_factors, dtype=np.int64)) if n else np.zeros((0, 0), np.int64)
        return PresentedGroup(self.p, self.K, n, rels)

    # stages are 1-based as in A_1 <- A_2 <- ...
    def composite(self, s: int, r: int) -> np.ndarray:
        """Matrix of A_s -> A_r (s >= r)."""
        n_r = len(self.groups[r - 1].invariant_factors)
        M = np.eye(n_r, dtype=np.int64)
        for k in range(r, s):
            M = (self.transitions[k - 1] @ M) % self.p ** self.K
        return M

    def image_log_order(self, s: int, r: int) -> int:
        return self._pres[r - 1].subgroup_log_order(self.composite(s, r))

    def is_zero_map(self, s: int, r: int) -> bool:
        return all(self._pres[r - 1].is_zero(row) for row in self.composite(s, r))

    # -------------------------------------------------------------- json
    def to_json(self) -> dict:
        return {"groups": [list(g.invariant_factors) for g in self.groups],
                "transitions": [m.tolist() for m in self.transitions]}

    @classmethod
    def from_json(cls, p: int, doc) -> "GroupTower":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as e:
                raise ParseError(f"tower JSON: {e}") from e
        if not isinstance(doc, dict) or "groups" not in doc or "transitions" not in doc:
            raise ParseError("tower JSON needs 'groups' and 'transitions'")
        return cls(p, doc["groups"], doc["transitions"])


@dataclass
class Verdict:
    verdict: str
    stride: int | None = None
    witnesses: dict = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        return self.verdict in (PRO_ZERO, ML, QC)


def is_pro_zero_within(T: GroupTower) -> Verdict:
    """Per r, the least s > r in the window with A_s -> A_r zero.

    Positive when the r with a witness form an initial segment and every
    later r is too close to the window edge for the largest stride seen.
    """
    W = T.window
    wit = {}
    for r in range(1, W):
        for s in range(r + 1, W + 1):
            if T.is_zero_map(s, r):
                wit[r] = s
                break
    # A nonzero image into A_1 that has stopped shrinking at the edge is taken
    # as never dying.  Only stage 1 is used: every positive verdict needs a
    # witness there, so growing the window cannot turn a positive negative.
    if 1 not in wit and W >= 3 and T.image_log_order(W, 1) == T.image_log_order(W - 1, 1) > 0:
        return Verdict(NOT_PRO_ZERO, None, {"stable_nonzero_image_at": 1})
    if not wit or 1 not in wit:
        return Verdict(INCONCLUSIVE, None, wit)
    stride = max(s - r for r, s in wit.items())
    if stride > W - 2:
        # the stride never repeats inside the window
        return Verdict(INCONCLUSIVE, stride, wit)
    for r in range(1, W):
        if r not in wit and r + stride <= W:
            return Verdict(INCONCLUSIVE, stride, wit)
    return Verdict(PRO_ZERO, stride, wit)


def _stabilization(T: GroupTower, r: int):
    """First s from which im(A_s -> A_r) stays put through the window edge."""
    W = T.window
    orders = [T.image_log_order(s, r) for s in range(r, W + 1)]
    for k, o in enumerate(orders):
        if o == 0 or (k < len(orders) - 1 and all(x == o for x in orders[k:])):
            return r + k
    return None


def is_mittag_leffler_within(T: GroupTower) -> Verdict:
    W = T.window
    stab = {}
    for r in range(1, W):
        s0 = _stabilization(T, r)
        if s0 is not None:
            stab[r] = s0
    if 1 not in stab:
        return Verdict(INCONCLUSIVE, None, stab)
    stride = max(s - r for r, s in stab.items())
    if stride > W - 2:
        return Verdict(INCONCLUSIVE, stride, stab)
    for r in range(1, W):
        if r not in stab and r + stride < W:
            return Verdict(INCONCLUSIVE, stride, stab)
    return Verdict(ML, stride, stab)


def is_quickly_converging_within(T: GroupTower) -> Verdict:
    """Some stride k with {im(A_(i+k) -> A_i)}_i eventually constant in the window.

    The image tower B_i has transitions B_(i+1) -> B_i; each is an isomorphism
    exactly when |B_(i+1)| = |im(A_(i+1+k) -> A_i)| = |B_i|.  Eventually
    constant within the window means the tail of these transitions, at least
    one of them, are all isomorphisms.
    """
    W = T.window
    for k in range(0, W - 1):
        last = W - k           # B_i defined for i <= last
        if last < 2:
            break
        iso = []
        for i in range(1, last):
            b_next = T.image_log_order(i + 1 + k, i + 1)
            b_img = T.image_log_order(i + 1 + k, i)
            b_here = T.image_log_order(i + k, i)
            iso.append(b_next == b_img == b_here)
        if iso[-1]:
            start = len(iso)
            while start > 0 and iso[start - 1]:
                start -= 1
            return Verdict(QC, k, {"constant_from": start + 1})
    return Verdict(INCONCLUSIVE)


def lim_and_lim1(T: GroupTower) -> tuple[FiniteAbelianPGroup, FiniteAbelianPGroup]:
    """Window-relative lim and lim^1.

    lim: compatible tuples (a_1, ..., a_W) projected to the stages 1..W-1
    (the edge stage is dropped, as it is unconstrained from above).
    lim^1: cokernel of the shift-difference map prod_1^W A_i -> prod_1^(W-1) A_i,
    (a_i) -> (a_i - t(a_(i+1))).
    """
    p, K = T.p, T.K
    W = T.window
    sizes = [len(g.invariant_factors) for g in T.groups]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    N = int(offs[-1])
    N1 = int(offs[W - 1])
    M = p ** K
    src = PresentedGroup(p, K, N)
    for i, g in enumerate(T.groups):
        for j, f in enumerate(g.invariant_factors):
            v = np.zeros(N, np.int64)
            v[offs[i] + j] = f
            src.add_relation(v)
    dst = PresentedGroup(p, K, N1)
    for i, g in enumerate(T.groups[:-1]):
        for j, f in enumerate(g.invariant_factors):
            v = np.zeros(N1, np.int64)
            v[offs[i] + j] = f
            dst.add_relation(v)
    images = np.zeros((N, N1), dtype=np.int64)
    for i in range(W):
        for j in range(sizes[i]):
            row = offs[i] + j
            if i < W - 1:
                images[row, offs[i] + j] += 1
            if i >= 1:
                images[row, offs[i - 1]:offs[i]] -= T.transitions[i - 1][j]
    images %= M
    kern = hom_kernel(src, dst, images)
    # project to stages 1..W-1
    proj = PresentedGroup(p, K, N1, dst.relation_rows())
    lim = proj.subgroup_invariants(kern[:, :N1]) if kern.shape[0] else FiniteAbelianPGroup(p)
    coker = dst.copy()
    coker.add_relations(images)
    return lim, coker.invariants()


# ------------------------------------------------------------------ examples / generators

def constant_tower(p: int, factors, W: int) -> GroupTower:
    n = len(factors)
    return GroupTower(p, [factors] * W, [np.eye(n, dtype=np.int64)] * (W - 1))


def multiplication_tower(p: int, e: int, W: int) -> GroupTower:
    """Z/p^e <- Z/p^e <- ... with every transition multiplication by p."""
    return GroupTower(p, [[p ** e]] * W, [[[p]]] * (W - 1))


def zero_tower(p: int, factors, W: int) -> GroupTower:
    n = len(factors)
    return GroupTower(p, [factors] * W, [np.zeros((n, n), dtype=np.int64)] * (W - 1))


def random_tower(p: int, W: int, rng, max_rank: int = 3, max_exp: int = 3) -> GroupTower:
    """Random window; transition entries are scaled so the maps are homomorphisms."""
    groups = []
    for _ in range(W):
        rank = int(rng.integers(0, max_rank + 1))
        groups.append(sorted((p ** int(rng.integers(1, max_exp + 1)) for _ in range(rank)), reverse=True))
    trans = []
    for i in range(W - 1):
        src, dst = groups[i + 1], groups[i]
        m = np.zeros((len(src), len(dst)), dtype=np.int64)
        for a, fa in enumerate(src):
            for b, fb in enumerate(dst):
                # the image of a generator of order fa must have order dividing fa
                scale = fb // fa if fb > fa else 1
                m[a, b] = int(rng.integers(0, fb)) * scale % fb
        if rng.random() < 0.25:
            m[:] = 0
        trans.append(m)
    return GroupTower(p, groups, trans)
