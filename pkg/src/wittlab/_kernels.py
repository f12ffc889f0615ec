"""Hot loops: elimination over Z/p^K and GF(p), with a numba and a numpy backend.

Set WITTLAB_NO_NUMBA=1 to force the numpy backend.  Both backends are always
importable as ``*_np`` / ``*_nb`` so they can be benchmarked against each other.

Conventions shared by the Howell routines: a submodule of (Z/p^K)^n is stored
row-by-pivot, ``rows[c]`` holding the basis vector whose first nonzero entry
sits in column ``c`` and equals exactly ``p**val[c]``; ``has[c]`` marks the
occupied columns.  With the Howell closure property every coset has a unique
reduced representative.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("WITTLAB_NO_NUMBA", "") not in ("1", "true", "yes")


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def _inv_mod(a, m):
    # extended Euclid; a must be a unit mod m
    t, nt = 0, 1
    r, nr = m, a % m
    while nr != 0:
        q = r // nr
        t, nt = nt, t - q * nt
        r, nr = nr, r - q * nr
    return t % m


def _valuation(x, p):
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e


# ---------------------------------------------------------------- numpy backend

def howell_insert_np(rows, has, val, vec, p, K):
    M = p ** K
    stack = [np.asarray(vec, dtype=np.int64) % M]
    grew = False
    while stack:
        w = stack.pop()
        c = 0
        while True:
            nz = np.flatnonzero(w[c:])
            if nz.size == 0:
                break
            c += int(nz[0])
            x = int(w[c])
            e = _valuation(x, p)
            if has[c] and e >= val[c]:
                w = (w - (x // p ** int(val[c])) * rows[c]) % M
                c += 1
                continue
            w = (w * _inv_mod(x // p ** e, M)) % M
            if has[c]:
                stack.append(rows[c].copy())
            rows[c] = w
            has[c] = True
            val[c] = e
            grew = True
            if e > 0:
                extra = (w * p ** (K - e)) % M
                if extra.any():
                    stack.append(extra)
            break
    return grew


def howell_reduce_np(rows, has, val, vec, p, K):
    M = p ** K
    w = np.asarray(vec, dtype=np.int64) % M
    for c in np.flatnonzero(has):
        x = int(w[c])
        if x:
            f = x // p ** int(val[c])
            if f:
                w = (w - f * rows[c]) % M
    return w


def snf_valuations_np(A, p, K):
    M = p ** K
    A = np.array(A, dtype=np.int64) % M
    m, n = A.shape
    table = np.array([K] + [_valuation(x, p) for x in range(1, M)], dtype=np.int64)
    out = []
    t = 0
    while t < m and t < n:
        sub = table[A[t:, t:]]
        k = int(np.argmin(sub))
        i, j = divmod(k, n - t)
        best = int(sub[i, j])
        if best >= K:
            break
        i += t
        j += t
        if i != t:
            A[[t, i]] = A[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
        pe = p ** best
        A[t] = (A[t] * _inv_mod(int(A[t, t]) // pe, M)) % M
        col = A[:, t] // pe
        col[t] = 0
        rowsel = np.flatnonzero(col)
        if rowsel.size:
            A[rowsel] = (A[rowsel] - np.outer(col[rowsel], A[t])) % M
        A[t, t + 1:] = 0
        out.append(best)
        t += 1
    return np.array(out, dtype=np.int64)


def rref_modp_np(A, p):
    A = np.array(A, dtype=np.int64) % p
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = (A[r] * _inv_mod(int(A[r, c]), p)) % p
        col = A[:, c].copy()
        col[r] = 0
        sel = np.flatnonzero(col)
        if sel.size:
            A[sel] = (A[sel] - np.outer(col[sel], A[r])) % p
        pivots.append(c)
        r += 1
    return A, np.array(pivots, dtype=np.int64)


def rref_gf2_packed_np(W, ncols):
    W = np.array(W, dtype=np.uint64)
    m = W.shape[0]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        word, bit = divmod(c, 64)
        mask = np.uint64(1) << np.uint64(bit)
        hits = np.flatnonzero(W[r:, word] & mask)
        if hits.size == 0:
            continue
        i = r + int(hits[0])
        if i != r:
            W[[r, i]] = W[[i, r]]
        sel = np.flatnonzero(W[:, word] & mask)
        sel = sel[sel != r]
        if sel.size:
            W[sel] ^= W[r]
        pivots.append(c)
        r += 1
    return W, np.array(pivots, dtype=np.int64)


# ---------------------------------------------------------------- numba backend

if _HAVE_NUMBA:
    _jit = numba.njit(cache=True)
    _inv_mod_nb = _jit(_inv_mod)
    _valuation_nb = _jit(_valuation)

    @_jit
    def howell_insert_nb(rows, has, val, vec, p, K):
        n = rows.shape[1]
        M = p ** K
        cap = 16
        stack = np.zeros((cap, n), dtype=np.int64)
        for k in range(n):
            stack[0, k] = vec[k] % M
        top = 1
        grew = False
        w = np.zeros(n, dtype=np.int64)
        while top > 0:
            top -= 1
            for k in range(n):
                w[k] = stack[top, k]
            for c in range(n):
                x = w[c]
                if x == 0:
                    continue
                e = _valuation_nb(x, p)
                if has[c]:
                    e0 = val[c]
                    if e >= e0:
                        f = x // p ** e0
                        for k in range(c, n):
                            w[k] = (w[k] - f * rows[c, k]) % M
                        continue
                    u = _inv_mod_nb(x // p ** e, M)
                    if top + 2 >= cap:
                        bigger = np.zeros((cap * 2, n), dtype=np.int64)
                        bigger[:cap] = stack
                        stack = bigger
                        cap *= 2
                    for k in range(n):
                        stack[top, k] = rows[c, k]
                    top += 1
                    for k in range(n):
                        rows[c, k] = (w[k] * u) % M
                    val[c] = e
                else:
                    u = _inv_mod_nb(x // p ** e, M)
                    for k in range(n):
                        rows[c, k] = (w[k] * u) % M
                    has[c] = True
                    val[c] = e
                grew = True
                if e > 0:
                    if top + 2 >= cap:
                        bigger = np.zeros((cap * 2, n), dtype=np.int64)
                        bigger[:cap] = stack
                        stack = bigger
                        cap *= 2
                    s = p ** (K - e)
                    nonzero = False
                    for k in range(n):
                        y = (rows[c, k] * s) % M
                        stack[top, k] = y
                        if y != 0:
                            nonzero = True
                    if nonzero:
                        top += 1
                break
        return grew

    @_jit
    def howell_reduce_nb(rows, has, val, vec, p, K):
        n = rows.shape[1]
        M = p ** K
        w = np.empty(n, dtype=np.int64)
        for k in range(n):
            w[k] = vec[k] % M
        for c in range(n):
            if not has[c]:
                continue
            x = w[c]
            if x == 0:
                continue
            f = x // p ** val[c]
            if f != 0:
                for k in range(c, n):
                    w[k] = (w[k] - f * rows[c, k]) % M
        return w

    @_jit
    def snf_valuations_nb(A0, p, K):
        M = p ** K
        m, n = A0.shape
        A = np.empty((m, n), dtype=np.int64)
        for i in range(m):
            for j in range(n):
                A[i, j] = A0[i, j] % M
        out = np.empty(min(m, n), dtype=np.int64)
        t = 0
        while t < m and t < n:
            best = K
            bi = -1
            bj = -1
            for i in range(t, m):
                for j in range(t, n):
                    x = A[i, j]
                    if x != 0:
                        e = _valuation_nb(x, p)
                        if e < best:
                            best = e
                            bi = i
                            bj = j
                            if e == 0:
                                break
                if best == 0:
                    break
            if bi < 0:
                break
            if bi != t:
                for j in range(n):
                    tmp = A[t, j]
                    A[t, j] = A[bi, j]
                    A[bi, j] = tmp
            if bj != t:
                for i in range(m):
                    tmp = A[i, t]
                    A[i, t] = A[i, bj]
                    A[i, bj] = tmp
            pe = p ** best
            u = _inv_mod_nb(A[t, t] // pe, M)
            for j in range(t, n):
                A[t, j] = (A[t, j] * u) % M
            for i in range(m):
                if i != t and A[i, t] != 0:
                    f = A[i, t] // pe
                    for j in range(t, n):
                        A[i, j] = (A[i, j] - f * A[t, j]) % M
            for j in range(t + 1, n):
                A[t, j] = 0
            out[t] = best
            t += 1
        return out[:t].copy()

    @_jit
    def rref_modp_nb(A0, p):
        m, n = A0.shape
        A = np.empty((m, n), dtype=np.int64)
        for i in range(m):
            for j in range(n):
                A[i, j] = A0[i, j] % p
        pivots = np.empty(min(m, n), dtype=np.int64)
        r = 0
        for c in range(n):
            if r == m:
                break
            i = r
            while i < m and A[i, c] == 0:
                i += 1
            if i == m:
                continue
            if i != r:
                for j in range(n):
                    tmp = A[r, j]
                    A[r, j] = A[i, j]
                    A[i, j] = tmp
            u = _inv_mod_nb(A[r, c], p)
            for j in range(c, n):
                A[r, j] = (A[r, j] * u) % p
            for i in range(m):
                if i != r and A[i, c] != 0:
                    f = A[i, c]
                    for j in range(c, n):
                        A[i, j] = (A[i, j] - f * A[r, j]) % p
            pivots[r] = c
            r += 1
        return A, pivots[:r].copy()

    @_jit
    def rref_gf2_packed_nb(W0, ncols):
        m, nw = W0.shape
        W = W0.copy()
        pivots = np.empty(min(m, ncols), dtype=np.int64)
        r = 0
        one = np.uint64(1)
        for c in range(ncols):
            if r == m:
                break
            word = c // 64
            mask = one << np.uint64(c % 64)
            i = r
            while i < m and (W[i, word] & mask) == 0:
                i += 1
            if i == m:
                continue
            if i != r:
                for k in range(nw):
                    tmp = W[r, k]
                    W[r, k] = W[i, k]
                    W[i, k] = tmp
            for i in range(m):
                if i != r and (W[i, word] & mask) != 0:
                    for k in range(word, nw):
                        W[i, k] ^= W[r, k]
            pivots[r] = c
            r += 1
        return W, pivots[:r].copy()


if USE_NUMBA:
    howell_insert = howell_insert_nb
    howell_reduce = howell_reduce_nb
    snf_valuations = snf_valuations_nb
    rref_modp = rref_modp_nb
    rref_gf2_packed = rref_gf2_packed_nb
else:
    howell_insert = howell_insert_np
    howell_reduce = howell_reduce_np
    snf_valuations = snf_valuations_np
    rref_modp = rref_modp_np
    rref_gf2_packed = rref_gf2_packed_np


def pack_gf2(A):
    """Pack a 0/1 matrix into uint64 words, column c at bit c % 64 of word c // 64."""
    A = np.asarray(A, dtype=np.uint64) & np.uint64(1)
    m, n = A.shape
    nw = max(1, (n + 63) // 64)
    W = np.zeros((m, nw), dtype=np.uint64)
    for c in range(n):
        W[:, c // 64] |= A[:, c] << np.uint64(c % 64)
    return W


def unpack_gf2(W, ncols):
    m = W.shape[0]
    out = np.zeros((m, ncols), dtype=np.int64)
    for c in range(ncols):
        out[:, c] = ((W[:, c // 64] >> np.uint64(c % 64)) & np.uint64(1)).astype(np.int64)
    return out
