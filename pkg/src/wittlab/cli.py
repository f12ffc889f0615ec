"""Command-line front end.

Every subcommand prints one JSON document (or a flat csv/table rendering of
it).  Reports are deterministic: keys are sorted and no timing is included
unless ``--timing`` is given.  Errors go to stderr as JSON and the process
exits with the code attached to the error class.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from .errors import EXIT_INTERNAL, EXIT_PARSE, ParseError, WittlabError

SCHEMA = "wittlab/1"


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting so parse failures share the error path."""

    def __init__(self, *a, **kw):
        kw.setdefault("allow_abbrev", False)
        super().__init__(*a, **kw)

    def error(self, message):
        raise _ArgError(message)


# ------------------------------------------------------------------ helpers

def jsonable(x):
    from .linalg import FiniteAbelianPGroup
    if isinstance(x, FiniteAbelianPGroup):
        return x.to_list()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    if is_dataclass(x):
        return jsonable(asdict(x))
    return x


def _algebra(text: str):
    from .dsl import parse_ring
    return parse_ring(text).to_algebra()


def _ideal_rows(A, text: str):
    from .dsl import parse_polys
    return np.array([A.from_poly(f) for f in parse_polys(text, A.field, A.generators)],
                    dtype=np.int64).reshape(-1, A.n)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from e


def _load_json_arg(text: str):
    path = Path(text)
    raw = path.read_text() if not text.lstrip().startswith(("{", "[")) and path.exists() else text
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from e


# ------------------------------------------------------------------ commands
# each returns (result dict, provenance string)

def cmd_nu(a):
    from .forms import nu
    res = nu(_algebra(a.ring), a.degree)
    return {"nu": res.group, "nu_tilde": res.cokernel}, "nu^n = ker(1 - C^-1), nu~^n = coker(1 - C^-1) on Omega^n"


def cmd_nutilde(a):
    from .forms import nu_tilde
    return {"nu_tilde": nu_tilde(_algebra(a.ring), a.degree)}, "nu~^n = coker(1 - C^-1 : Omega^n -> Omega^n / dOmega^(n-1))"


def cmd_dlog(a):
    from .forms import dlog_span
    sp = dlog_span(_algebra(a.ring), a.degree)
    return ({"dlog_span": sp.group, "dim": sp.dim, "units_used": sp.units_used,
             "contained_in_nu": sp.contained_in_nu, "equals_nu": sp.equals_nu},
            "span of dlog u_1 ^ ... ^ dlog u_n compared with ker(1 - C^-1)")


def cmd_drw(a):
    from .drw import drw_presentation, verify_identities
    A = _algebra(a.ring)
    cx = drw_presentation(A, a.r, a.degree, headroom=a.headroom)
    out = {"group": cx.group, "order": cx.order, "generators": len(cx.generators())}
    if a.identities:
        checks = verify_identities(cx.engine, a.r, a.degree)
        out["identities"] = {k: {"ok": v.ok, "failures": len(v.failures)} for k, v in sorted(checks.items())}
    return out, "W_r Omega^n by generators and relations, closed under F, V, R, d"


def cmd_drw_log(a):
    from .drw import drw_log
    lg = drw_log(_algebra(a.ring), a.r, a.degree)
    return {"log": lg.group, "ambient": lg.ambient}, "subgroup of W_r Omega^n generated by dlog[u_1] ^ ... ^ dlog[u_n]"


def cmd_pi_fbar(a):
    from .drw import pi_Fbar
    res = pi_Fbar(_algebra(a.ring), a.r, a.degree)
    return ({"kernel": res.kernel, "cokernel": res.cokernel, "log": res.log,
             "log_in_kernel": res.log_in_kernel, "log_equals_kernel": res.log_equals_kernel,
             "well_defined": res.well_defined},
            "pi - Fbar : W_r Omega^m -> W_r Omega^m / dV^(r-1) Omega^(m-1)")


def cmd_witt(a):
    from . import witt
    if a.ring:
        A = _algebra(a.ring)
        out = {"W_r": witt.witt_group_invariants(A, a.r)}
        if witt.is_perfect(A):
            k, c = witt.ker_coker_F_minus_1(A, a.r)
            out["ker_F_minus_1"], out["coker_F_minus_1"] = k, c
        return out, "additive group of W_r(R) through V-filtration digits"
    if a.p is None:
        raise ParseError("witt needs --p or --ring")
    ctx = witt.witt_context(a.p, a.r)
    fmt = lambda polys: [_format_int_poly(f, a.r) for f in polys]
    return ({"p": a.p, "r": a.r, "sum": fmt(ctx.sum_polys), "prod": fmt(ctx.prod_polys),
             "ghost_sum_ok": witt.ghost_identity_holds(a.p, a.r, "sum", ctx.sum_polys),
             "ghost_prod_ok": witt.ghost_identity_holds(a.p, a.r, "prod", ctx.prod_polys)},
            "S_i, P_i from w_i = sum_j p^j x_j^(p^(i-j)) by exact integer recursion")


def _format_int_poly(f: dict, r: int) -> str:
    names = [f"x{i}" for i in range(r)] + [f"y{i}" for i in range(r)]
    parts = []
    for mono in sorted(f, key=lambda m: (-sum(m), m)):
        c = f[mono]
        body = "*".join(f"{names[i]}^{e}" if e > 1 else names[i] for i, e in enumerate(mono) if e)
        parts.append(f"{c}" if not body else (body if c == 1 else f"-{body}" if c == -1 else f"{c}*{body}"))
    return " + ".join(parts).replace("+ -", "- ") or "0"


def cmd_tc_perfect(a):
    from .kgroups import tc_perfect
    rep = tc_perfect(_algebra(a.ring), a.r)
    return rep.to_json(), "pi_0 = ker(F - 1), pi_-1 = coker(F - 1) on W_r(R)"


def cmd_tr_ring(a):
    from .kgroups import SmoothnessTag, tr_homotopy_ring
    A = _algebra(a.ring)
    pres = tr_homotopy_ring(A, a.s, a.max_degree, tag=SmoothnessTag.derive(A, a.assert_smooth))
    return pres.to_json(), "TR^s_* = W_s Omega^* tensor Z/p^s[sigma_s], |sigma_s| = 2"


def cmd_k_smooth(a):
    from .kgroups import SmoothnessTag, ktc_report
    A = _algebra(a.ring)
    rep = ktc_report(A, a.degree, a.ring, SmoothnessTag.derive(A, a.assert_smooth))
    return rep.to_json(), "K_n/p = nu^n; TC_n/p from nu^n and nu~^(n+1)"


def cmd_pro_gl(a):
    from .kgroups import pro_gl
    rep = pro_gl(a.ring, a.ideal, a.degree, a.r, a.window)
    return rep.to_json(), "stagewise dlog surjectivity, unit-tower torsion and the R - F sequence on {R/I^s}"


def cmd_rigidity(a):
    from .forms import rigidity_check
    A = _algebra(a.ring)
    rep = rigidity_check(A, _ideal_rows(A, a.ideal), a.degree)
    return rep.as_dict(), "nu^n(R) -> nu^n(R/I) onto and nu~^n(R) -> nu~^n(R/I) bijective"


def cmd_hensel(a):
    from .hensel import hensel_lift, solve_special
    A = _algebra(a.ring)
    if a.special_s is not None:
        s = A.parse(a.special_s)
        x = solve_special(A, s, a.special_n)
        back = A.sub(x, A.mul(s, A.pow(x, a.special_n)))
        return ({"x": A.format(x), "back_substitution_ok": bool(np.array_equal(back, A.one()))},
                "x - s x^n = 1 by fixed-point iteration")
    if a.poly is None or a.alpha0 is None:
        raise ParseError("hensel needs --poly and --alpha0 (or --special-s)")
    res = hensel_lift(A, a.poly, A.parse(a.alpha0))
    return {"root": A.format(res.root), "steps": res.steps, "unique": res.unique}, "Newton iteration x - f(x)/f'(x)"


def cmd_tower(a):
    from . import prosys
    if a.json:
        T = prosys.GroupTower.from_json(a.p, _load_json_arg(a.json))
    elif a.example == "multiplication":
        T = prosys.multiplication_tower(a.p, a.e, a.window)
    elif a.example == "constant":
        T = prosys.constant_tower(a.p, [a.p ** a.e], a.window)
    elif a.example == "zero":
        T = prosys.zero_tower(a.p, [a.p ** a.e], a.window)
    else:
        raise ParseError("tower needs --json or --example")
    lim, lim1 = prosys.lim_and_lim1(T)
    pz = prosys.is_pro_zero_within(T)
    ml = prosys.is_mittag_leffler_within(T)
    qc = prosys.is_quickly_converging_within(T)
    return ({"window": T.window, "pro_zero": {"verdict": pz.verdict, "stride": pz.stride},
             "mittag_leffler": {"verdict": ml.verdict, "stride": ml.stride},
             "quickly_converging": {"verdict": qc.verdict, "stride": qc.stride},
             "lim": lim, "lim1": lim1},
            "window-relative detectors on A_1 <- ... <- A_W")


def cmd_dieudonne(a):
    from . import dieudonne as dd
    if a.json:
        doc = _load_json_arg(a.json)
        try:
            X = dd.DieudonneComplex(doc["p"], doc["N"], doc["ranks"], doc.get("d"), doc.get("F"))
        except KeyError as e:
            raise ParseError(f"complex JSON is missing {e}") from e
    else:
        X = dd.constant_complex(a.p, a.precision, a.f_scalar)
    rep = dd.check_saturated(X)
    kc = dd.ker_coker_F_minus_1_mod_p(X)
    return ({"saturated": rep.saturated, "precision": rep.precision, "V": rep.V,
             "v_precision": rep.v_precision, "complete_at": rep.complete_at,
             "ker_coker_F_minus_1_mod_p": [[k, c] for k, c in kc], "note": rep.note},
            "im F = {x : dx in pX}, V = pF^-1, FV = VF = p")


def cmd_discont(a):
    from . import discont
    if a.form:
        pairs = [tuple(int(x) for x in item.split("-")) for item in a.form.split(",") if item]
        w = discont.weight(discont.TwoForm.basis_sum(a.p, a.dim, pairs))
        return ({"rank": w.rank, "lower_bound": w.lower_bound, "exact": w.exact},
                "weight >= rank(interior product)/2; exact by exhaustive search")
    rep = discont.bek_family(a.p, _int_list(a.weights), a.stage)
    return rep.to_json(), "e(dlog f_s) coefficients tau_(2j) against sum db ^ dc"


def cmd_cache(a):
    from . import witt
    d = witt.cache_dir()
    if a.clear:
        removed = 0
        if d.exists():
            for f in sorted(d.iterdir()):
                if f.is_file():
                    f.unlink()
                    removed += 1
        return {"cache": str(d), "removed": removed}, "local cache of universal Witt polynomials"
    if a.warm:
        p, r = _int_list(a.warm)
        witt.witt_context(p, r)
    files = sorted(f.name for f in d.iterdir()) if d.exists() else []
    return {"cache": str(d), "files": files}, "local cache of universal Witt polynomials"


# ------------------------------------------------------------------ parser

def _global_options(ap):
    ap.add_argument("--config", help="key=value file supplying default flag values")
    ap.add_argument("--format", choices=["json", "csv", "table"], default="json")
    ap.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")
    ap.add_argument("--batch", help="file with one job (subcommand and flags) per line")
    ap.add_argument("--jobs", type=int, default=1, help="parallel workers for --batch")


def _global_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wittlab", add_help=False)
    _global_options(ap)
    return ap


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wittlab", description="Exact Witt vector, de Rham-Witt and K-theory computations.")
    _global_options(ap)
    sub = ap.add_subparsers(dest="command")

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.set_defaults(func=fn)
        return p

    def ring(p, required=True):
        p.add_argument("--ring", required=required, help='e.g. "GF(2)[t]/(t^2)"')

    for name, fn, h in [("nu", cmd_nu, "nu^n and nu~^n"), ("nutilde", cmd_nutilde, "nu~^n"),
                        ("dlog", cmd_dlog, "dlog span in Omega^n")]:
        p = add(name, fn, h)
        ring(p)
        p.add_argument("--degree", type=int, required=True)

    p = add("drw", cmd_drw, "W_r Omega^n")
    ring(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--headroom", type=int, default=1)
    p.add_argument("--identities", action="store_true", help="also verify the operator identities")

    for name, fn, h in [("drw-log", cmd_drw_log, "W_r Omega^n_log"), ("pi-fbar", cmd_pi_fbar, "pi - Fbar")]:
        p = add(name, fn, h)
        ring(p)
        p.add_argument("--r", type=int, required=True)
        p.add_argument("--degree", type=int, required=True)

    p = add("witt", cmd_witt, "universal polynomials or W_r(R)")
    ring(p, required=False)
    p.add_argument("--p", type=int)
    p.add_argument("--r", type=int, required=True)

    p = add("tc-perfect", cmd_tc_perfect, "TC of a perfect ring")
    ring(p)
    p.add_argument("--r", type=int, required=True)

    p = add("tr-ring", cmd_tr_ring, "TR^s homotopy ring")
    ring(p)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--assert-smooth", action="store_true")

    p = add("k-smooth", cmd_k_smooth, "K_n/p of a smooth local ring")
    ring(p)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--assert-smooth", action="store_true")

    p = add("pro-gl", cmd_pro_gl, "pro Geisser-Levine window checks")
    ring(p)
    p.add_argument("--ideal", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--window", type=int, default=4)

    p = add("rigidity", cmd_rigidity, "nu, nu~ along a nilpotent ideal")
    ring(p)
    p.add_argument("--ideal", required=True)
    p.add_argument("--degree", type=int, required=True)

    p = add("hensel", cmd_hensel, "Hensel lifting or x - s x^n = 1")
    ring(p)
    p.add_argument("--poly", help="polynomial in x over the ring")
    p.add_argument("--alpha0")
    p.add_argument("--special-s")
    p.add_argument("--special-n", type=int, default=2)

    p = add("tower", cmd_tower, "tower detectors")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--json", help="tower JSON (inline or a file path)")
    p.add_argument("--example", choices=["multiplication", "constant", "zero"])
    p.add_argument("--e", type=int, default=1)
    p.add_argument("--window", type=int, default=6)

    p = add("dieudonne", cmd_dieudonne, "saturation and F - 1 of a Dieudonne complex")
    p.add_argument("--json", help="complex JSON {p, N, ranks, d, F} (inline or a file path)")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--precision", type=int, default=4)
    p.add_argument("--f-scalar", type=int, default=1)

    p = add("discont", cmd_discont, "weights of 2-forms and the obstruction family")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--weights", default="1,2,3")
    p.add_argument("--stage", type=int, default=4)
    p.add_argument("--form", help='basis pairs, e.g. "0-1,2-3"')
    p.add_argument("--dim", type=int, default=4)

    p = add("cache", cmd_cache, "inspect or clear the polynomial cache")
    p.add_argument("--clear", action="store_true")
    p.add_argument("--warm", help="p,r to precompute")
    return ap


def read_config(path: str) -> dict:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise ParseError(f"cannot read config {path}: {e}") from e
    for k, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{k}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _apply_config(parser, argv, cfg: dict):
    """Config values become defaults of the chosen subcommand; explicit flags win."""
    if "cache" in cfg:
        os.environ["WITTLAB_CACHE"] = cfg.pop("cache")
    sub = next((a for a in parser._actions if isinstance(a, argparse._SubParsersAction)), None)
    cmd = next((x for x in argv if x in sub.choices), None) if sub else None
    if cmd is None:
        return
    sp = sub.choices[cmd]
    known = {a.dest: a for a in sp._actions}
    defaults = {}
    for k, v in cfg.items():
        act = known.get(k)
        if act is None:
            continue
        if isinstance(act, argparse._StoreTrueAction):
            defaults[k] = v.lower() in ("1", "true", "yes")
        else:
            defaults[k] = act.type(v) if act.type else v
            act.required = False
    sp.set_defaults(**defaults)


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, sort_keys=True, ensure_ascii=False)
    flat = [(k, doc[k]) for k in sorted(doc)]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in flat:
            w.writerow([k, v if isinstance(v, str) else json.dumps(v, sort_keys=True, ensure_ascii=False)])
        return buf.getvalue().rstrip("\n")
    width = max(len(k) for k, _ in flat)
    return "\n".join(f"{k.ljust(width)}  {v if isinstance(v, str) else json.dumps(v, sort_keys=True, ensure_ascii=False)}"
                     for k, v in flat)


def _inputs(ns) -> dict:
    skip = {"func", "command", "config", "format", "timing", "batch", "jobs"}
    return {k: v for k, v in sorted(vars(ns).items()) if k not in skip and v is not None}


def run_job(argv: list[str], timing: bool = False) -> tuple[int, dict]:
    """Run one subcommand; returns (exit code, document)."""
    parser = build_parser()
    try:
        pre, _ = _global_parser().parse_known_args(argv)
        if pre.config:
            _apply_config(parser, argv, read_config(pre.config))
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise _ArgError("a subcommand is required")
        t0 = time.perf_counter()
        result, provenance = ns.func(ns)
        doc = {"schema": SCHEMA, "command": ns.command, "inputs": _inputs(ns), "provenance": provenance}
        doc.update(jsonable(result))
        if timing:
            doc["wall_time_s"] = round(time.perf_counter() - t0, 6)
        return 0, doc
    except _ArgError as e:
        return EXIT_PARSE, _error_doc("ArgumentError", str(e), {}, EXIT_PARSE)
    except WittlabError as e:
        return e.exit_code, _error_doc(e.code, str(e), jsonable(e.details), e.exit_code)
    except Exception as e:  # anything else is a bug
        return EXIT_INTERNAL, _error_doc(type(e).__name__, str(e), {}, EXIT_INTERNAL)


def _error_doc(code, message, details, exit_code) -> dict:
    details = {k: v for k, v in details.items() if k != "transcript"}
    return {"schema": SCHEMA, "error": {"code": code, "message": message, "details": details,
                                        "exit_code": exit_code}}


def _batch_worker(args):
    line, timing = args
    return run_job(shlex.split(line), timing)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return 0
    try:
        top, _ = _global_parser().parse_known_args(argv)
    except _ArgError as e:
        print(json.dumps(_error_doc("ArgumentError", str(e), {}, EXIT_PARSE)), file=sys.stderr)
        return EXIT_PARSE
    if top.batch:
        try:
            lines = [l for l in Path(top.batch).read_text().splitlines()
                     if l.strip() and not l.lstrip().startswith("#")]
        except OSError as e:
            print(json.dumps(_error_doc("ParseError", str(e), {}, EXIT_PARSE)), file=sys.stderr)
            return EXIT_PARSE
        jobs = [(l, top.timing) for l in lines]
        if top.jobs > 1:
            with ProcessPoolExecutor(max_workers=top.jobs) as ex:
                results = list(ex.map(_batch_worker, jobs))
        else:
            results = [_batch_worker(j) for j in jobs]
        print(json.dumps([doc for _, doc in results], sort_keys=True, ensure_ascii=False))
        return max((c for c, _ in results), default=0)
    code, doc = run_job(argv, top.timing)
    if code:
        print(json.dumps(doc, sort_keys=True, ensure_ascii=False), file=sys.stderr)
        return code
    print(render(doc, top.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
