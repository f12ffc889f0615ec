"""Generated families of local Artinian test rings and nilpotent ideals."""

import itertools

ONE_VAR = [(q, k) for q in (2, 3, 4) for k in (2, 3, 4, 5, 6)]


def local_ring_corpus():
    """(ring text, ideal texts) for small local F_q-algebras with dims up to 12."""
    out = []
    for q, k in ONE_VAR:
        ideals = ["t"] + [f"t^{j}" for j in range(2, k)]
        out.append((f"GF({q})[t]/(t^{k})", ideals))
    for q in (2, 3):
        for a, b in itertools.product((2, 3, 4), repeat=2):
            if a > b:
                continue
            rels = [f"(x^{a}, y^{b})", f"(x^{a}, x*y, y^{b})", f"(x^{a}, y^{b}, x^2*y)"]
            for rel in rels:
                out.append((f"GF({q})[x,y]/{rel}", ["x", "y", "x, y", "x*y"]))
        out.append((f"GF({q})[x,y]/(x^2 - y^3, x*y)", ["x", "y", "x, y"]))
        out.append((f"GF({q})[x,y]/(x^2 + y^2, x*y^2)", ["x", "x, y"]))
    out.append(("GF(2)[x,y,z]/(x^2, y^2, z^2)", ["x", "x, y", "x*y*z"]))
    out.append(("GF(2)[x,y,z]/(x^2, y^2, z^2, x*y*z)", ["x, y, z", "z"]))
    out.append(("GF(3)[x,y,z]/(x^2, y^2, z^2, x*y, x*z, y*z)", ["x", "x, y, z"]))
    return out
