"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Kernel timings exclude the first (compiling) call.  With --end-to-end the
script also builds a de Rham-Witt presentation in two fresh interpreters,
one with WITTLAB_NO_NUMBA=1, so the whole stack is compared.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from wittlab import _kernels as kern


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def _howell_fill(impl, A, p, K):
    n = A.shape[1]
    rows = np.zeros((n, n), np.int64)
    has = np.zeros(n, np.bool_)
    val = np.zeros(n, np.int64)
    for r in A:
        impl(rows, has, val, r, p, K)


def kernel_cases(rng):
    A_p = rng.integers(0, 3, (120, 120)).astype(np.int64)
    A_pk = rng.integers(0, 8, (60, 60)).astype(np.int64)
    B = rng.integers(0, 2, (400, 400)).astype(np.int64)
    W = kern.pack_gf2(B)
    H = rng.integers(0, 8, (80, 40)).astype(np.int64)
    return [
        ("rref mod 3, 120x120", lambda: kern.rref_modp_np(A_p, 3), lambda: kern.rref_modp_nb(A_p, 3)),
        ("snf mod 2^3, 60x60", lambda: kern.snf_valuations_np(A_pk, 2, 3),
         lambda: kern.snf_valuations_nb(A_pk, 2, 3)),
        ("packed gf2 rref, 400x400", lambda: kern.rref_gf2_packed_np(W, 400),
         lambda: kern.rref_gf2_packed_nb(W, 400)),
        ("howell insert mod 2^3, 80 rows", lambda: _howell_fill(kern.howell_insert_np, H, 2, 3),
         lambda: _howell_fill(kern.howell_insert_nb, H, 2, 3)),
    ]


END_TO_END = ("import time; from wittlab import ring; from wittlab.drw import drw_engine, verify_identities;"
              "t = time.perf_counter(); A = ring('GF(2)[t]/(t^3)'); e = drw_engine(A, 3, 2);"
              "verify_identities(e, 3, 2); print(time.perf_counter() - t)")


def end_to_end():
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, WITTLAB_NO_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", END_TO_END], capture_output=True, text=True,
                             env=env, check=True)
        out[label] = float(res.stdout.strip())
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    if not kern._HAVE_NUMBA:
        print("numba is not installed; only the numpy backend exists")
        return 0
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numpy (ms)':>11s} {'numba (ms)':>11s} {'speedup':>8s}")
    for name, f_np, f_nb in kernel_cases(rng):
        t_np, t_nb = _best(f_np, args.repeat), _best(f_nb, args.repeat)
        print(f"{name:34s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f}")
    if args.end_to_end:
        e2e = end_to_end()
        print("\nde Rham-Witt of F_2[t]/t^3, r = 3, n <= 2 (includes JIT compile for numba):")
        for k, v in e2e.items():
            print(f"  {k:6s} {v:8.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
