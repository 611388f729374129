"""The ``kn`` command line.

Every subcommand writes a JSON report (or CSV for tables) to ``--out`` or
stdout.  Exit status: 0 when every requested check passes, 1 when one fails,
2 on usage errors, 3 when a window is too small (the report then carries the
margin deficit).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import InsufficientPrecision, KNError, ModelError, WindowError
from .fock import FockSpace, partitions
from .reports import all_pass
from .series import MINUS, PLUS
from .structure import (
    alpha_table,
    check_annihilation,
    check_delta_antisymmetry,
    check_delta_reproducing,
    gamma_table,
    xi_table,
)
from .surface import export_model, fmt_index, genus0_model, genus1_model, load_model, twice, validate_model
from .vertex import check_knop_residue_form, check_locality, check_translation, check_vacuum, genus0_compare

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3

# options whose values may start with a minus sign ("--window -6..6")
_VALUE_OPTS = {"--window", "--n", "--mode", "--u"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def parse_window(text: str, genus: int):
    """'a..b' in KN units -> twice-index bounds of the right parity."""
    try:
        a, b = text.split("..")
        lo, hi = Fraction(a), Fraction(b)
    except ValueError:
        raise UsageError(f"window {text!r} is not of the form a..b") from None
    if lo > hi:
        raise UsageError(f"empty window {text!r}")
    tlo, thi = int(2 * lo), int(2 * hi)
    if tlo < 2 * lo:
        tlo += 1
    if thi > 2 * hi:
        thi -= 1
    if (tlo - genus) % 2:
        tlo += 1
    if (thi - genus) % 2:
        thi -= 1
    if tlo > thi:
        raise UsageError(f"window {text!r} contains no index at genus {genus}")
    return tlo, thi


def parse_index(text: str, genus: int) -> int:
    try:
        t = twice(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{text!r} is not an index") from None
    if (t - genus) % 2:
        raise UsageError(f"index {text} has the wrong parity for genus {genus}")
    return t


def _model(args):
    if getattr(args, "model", None):
        return load_model(args.model)
    if args.genus == 0:
        return genus0_model()
    if args.genus == 1:
        return genus1_model()
    raise UsageError("built-in models exist for genus 0 and 1; pass --model for other genera")


def _emit(args, payload, text=None):
    body = text if text is not None else json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(body, encoding="utf-8")
    else:
        sys.stdout.write(body)


# ---------------------------------------------------------------------------
# suites shared with the acceptance tests


DEFAULT_U = {0: (-4, -2, 2, 4), 1: (-1, 3)}
LOCALITY_U = {0: 2, 1: -1}


def delta_suite(model, lo: int, hi: int, us=None, max_order: int = 3, orders=None):
    """Reproducing, antisymmetry and annihilation checks for one model."""
    g = model.genus
    reports = []
    if orders is None:
        for weight in (0, 1):
            for tk in range(lo, hi + 1, 2):
                reports.append(check_delta_reproducing(model, tk, lo, hi, weight))
        reports.append(check_delta_antisymmetry(model, lo, hi))
    for tu in (us if us is not None else DEFAULT_U.get(g, ())):
        if orders is None:
            reports.append(check_annihilation(model, tu, d_p=False))
            pairs = [(m, s - m) for s in range(max_order + 1) for m in range(s + 1)]
        else:
            pairs = [orders]
        for m, n in pairs:
            reports.append(check_annihilation(model, tu, m, n))
    return reports


def vacuum_suite(space: FockSpace, max_weight: int):
    return [check_vacuum(space, js) for w in range(max_weight + 1) for js in partitions(w)]


def translation_suite(space: FockSpace, max_order: int, precision=None):
    return [check_translation(space, m, precision) for m in range(max_order + 1)]


def locality_suite(space: FockSpace, twice_u: int, max_order: int = 2, dong: bool = True):
    """Generator pair, derived pairs with N = m+n+2, one Dong pair, and the sharpness probe at genus 0."""
    reports = []
    for s in range(max_order + 1):
        for m in range(s + 1):
            a, b = (m + 1,), (s - m + 1,)
            reports.append(check_locality(space, a, b, twice_u, s + 2))
    if dong:
        # pairwise order 2 between generators, so M = 3 * 2
        reports.append(check_locality(space, (1, 1), (1,), twice_u, 6))
    if space.genus == 0:
        reports.append(check_locality(space, (1,), (1,), twice_u, 1, expect_zero=False))
    return reports


def _axiom_defaults(genus):
    # (vacuum weight, translation order) from the acceptance targets
    return (5, 3) if genus == 0 else (3, 2)


# ---------------------------------------------------------------------------
# subcommands


def cmd_basis(args):
    model = _model(args)
    g = model.genus
    t = parse_index(args.n, g)
    point = PLUS if args.point == "plus" else MINUS
    form = model.f(args.lam, t, args.prec, point)
    s = form.series
    lead = None
    try:
        k, c = s.leading()
        lead = {"exponent": k, "value": _render(c)}
    except InsufficientPrecision:
        pass
    payload = {
        "genus": g,
        "lambda": args.lam,
        "n": fmt_index(t),
        "point": args.point,
        "series": s.to_json(),
        "leading": lead,
    }
    _emit(args, payload)
    return EXIT_OK


def _render(c):
    from .coeffs import render_scalar
    return render_scalar(c)


def cmd_model_export(args):
    model = _model(args)
    lo, hi = parse_window(args.window, model.genus)
    _emit(args, export_model(model, lo, hi, args.prec))
    return EXIT_OK


def cmd_model_validate(args):
    model = load_model(args.file)
    lo, hi = parse_window(args.window, model.genus)
    rep = validate_model(model, lo, hi, args.prec)
    _emit(args, rep)
    return EXIT_OK if rep["result"] == "pass" else EXIT_FAIL


def cmd_constants(args):
    model = _model(args)
    lo, hi = parse_window(args.window, model.genus)
    build = {"gamma": gamma_table, "xi": xi_table, "alpha": alpha_table}[args.table]
    tables = build(model, lo, hi)
    fmt = args.format or ("csv" if args.out and args.out.endswith(".csv") else "json")
    if fmt == "csv":
        _emit(args, None, tables.to_csv(args.table))
    else:
        _emit(args, tables.to_json(args.table))
    return EXIT_OK


def cmd_fock_dim(args):
    model = _model(args)
    space = FockSpace(model, args.wmax)
    payload = {
        "genus": model.genus,
        "wmax": args.wmax,
        "dim": space.dim(),
        "by_weight": [space.dim(w) for w in range(args.wmax + 1)],
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_fock_apply(args):
    model = _model(args)
    space = FockSpace(model, args.wmax)
    t = parse_index(args.mode, model.genus)
    try:
        v = space.parse_state(args.state)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = space.apply_mode(t, v)
    payload = {
        "mode": fmt_index(t),
        "state": args.state,
        "result": space.render(out),
        "vector": out.to_json(model.genus),
    }
    _emit(args, payload)
    return EXIT_OK


def _finish(args, name, params, reports):
    ok = all_pass(reports)
    _emit(args, {"command": name, "params": params, "result": "pass" if ok else "fail", "reports": reports})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check_delta(args):
    model = _model(args)
    g = model.genus
    lo, hi = parse_window(args.window or ("-6..6" if g == 0 else "-9/2..9/2"), g)
    us = [parse_index(args.u, g)] if args.u else None
    orders = None
    if args.orders:
        try:
            m, n = (int(x) for x in args.orders.split(","))
        except ValueError:
            raise UsageError("--orders expects m,n") from None
        if m < 0 or n < 0:
            raise UsageError("--orders must be nonnegative")
        orders = (m, n)
        if us is None:
            us = list(DEFAULT_U.get(g, ()))
    reports = delta_suite(model, lo, hi, us, args.max_order, orders)
    params = {"genus": g, "twice_lo": lo, "twice_hi": hi, "twice_u": us, "orders": orders}
    return _finish(args, "check delta", params, reports)


def cmd_check_axioms(args):
    model = _model(args)
    g = model.genus
    space = FockSpace(model, args.wmax)
    vac_w, tr_m = _axiom_defaults(g)
    vac_w = min(vac_w if args.vacuum_weight is None else args.vacuum_weight, args.wmax)
    tr_m = min(tr_m if args.translation_order is None else args.translation_order, args.wmax - 1)
    tu = parse_index(args.u, g) if args.u else LOCALITY_U.get(g, g + 2)
    reports = []
    only = args.only
    if only in (None, "vacuum"):
        reports += vacuum_suite(space, vac_w)
    if only in (None, "translation"):
        reports += translation_suite(space, tr_m, args.prec)
    if only in (None, "locality"):
        reports += locality_suite(space, tu, dong=not args.no_dong)
    if only in (None, "knop"):
        reports.append(check_knop_residue_form(model, g - 12, g + 12))
    params = {"genus": g, "wmax": args.wmax, "prec": args.prec, "only": only, "vacuum_weight": vac_w,
              "translation_order": tr_m, "twice_u": tu}
    return _finish(args, "check axioms", params, reports)


def cmd_compare_genus0(args):
    reports = genus0_compare(args.wmax, 2 * args.range, args.prec)
    return _finish(args, "compare genus0", {"wmax": args.wmax, "range": args.range, "prec": args.prec}, reports)


# ---------------------------------------------------------------------------
# parser


def _genus_opts(p):
    p.add_argument("--genus", type=int, choices=(0, 1), default=None)
    p.add_argument("--model", help="surface-model JSON file instead of a built-in genus")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kn", description="Exact KN bases, Fock spaces and vertex-algebra checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis", help="expansion of one KN basis element")
    _genus_opts(p)
    p.add_argument("--lambda", dest="lam", type=int, required=True, choices=(-1, 0, 1))
    p.add_argument("--n", required=True, help="KN index, e.g. -1/2")
    p.add_argument("--prec", type=int, required=True)
    p.add_argument("--point", choices=("plus", "minus"), default="plus")
    p.add_argument("--out")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("model", help="export or validate surface-model files")
    msub = p.add_subparsers(dest="action", required=True)
    q = msub.add_parser("export")
    _genus_opts(q)
    q.add_argument("--window", required=True)
    q.add_argument("--prec", type=int, default=8)
    q.add_argument("--out")
    q.set_defaults(func=cmd_model_export)
    q = msub.add_parser("validate")
    q.add_argument("file")
    q.add_argument("--window", required=True)
    q.add_argument("--prec", type=int, default=4)
    q.add_argument("--out")
    q.set_defaults(func=cmd_model_validate)

    p = sub.add_parser("constants", help="gamma, xi or alpha tables")
    p.add_argument("table", choices=("gamma", "xi", "alpha"))
    _genus_opts(p)
    p.add_argument("--window", required=True)
    p.add_argument("--prec", type=int, default=None, help="accepted for compatibility; precisions are derived")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("fock", help="Fock space utilities")
    fsub = p.add_subparsers(dest="action", required=True)
    q = fsub.add_parser("dim")
    _genus_opts(q)
    q.add_argument("--wmax", type=int, required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_fock_dim)
    q = fsub.add_parser("apply")
    _genus_opts(q)
    q.add_argument("--mode", required=True)
    q.add_argument("--state", required=True)
    q.add_argument("--wmax", type=int, default=6)
    q.add_argument("--out")
    q.set_defaults(func=cmd_fock_apply)

    p = sub.add_parser("check", help="identity and axiom checks")
    csub = p.add_subparsers(dest="action", required=True)
    q = csub.add_parser("delta")
    _genus_opts(q)
    q.add_argument("--window")
    q.add_argument("--orders", help="m,n for a single annihilation check")
    q.add_argument("--u", help="KN index of A_u in F_u")
    q.add_argument("--max-order", type=int, default=3)
    q.add_argument("--out")
    q.set_defaults(func=cmd_check_delta)
    q = csub.add_parser("axioms")
    _genus_opts(q)
    q.add_argument("--wmax", type=int, required=True)
    q.add_argument("--prec", type=int, default=None, help="translation checked on exponents below this")
    q.add_argument("--only", choices=("vacuum", "translation", "locality", "knop"))
    q.add_argument("--u", help="KN index of A_u in the locality factor")
    q.add_argument("--vacuum-weight", type=int)
    q.add_argument("--translation-order", type=int)
    q.add_argument("--no-dong", action="store_true", help="skip the level-2 locality pair")
    q.add_argument("--out")
    q.set_defaults(func=cmd_check_axioms)

    p = sub.add_parser("compare", help="comparisons with classical constructions")
    psub = p.add_subparsers(dest="action", required=True)
    q = psub.add_parser("genus0")
    q.add_argument("--wmax", type=int, default=5)
    q.add_argument("--range", type=int, default=6, help="|n| bound for brackets and modes")
    q.add_argument("--prec", type=int, default=None)
    q.add_argument("--out")
    q.set_defaults(func=cmd_compare_genus0)
    return parser


def _join_values(argv):
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_values(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "genus", None) is None and not getattr(args, "model", None) and "genus" in args:
        args.genus = 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"kn: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InsufficientPrecision, WindowError) as exc:
        _emit(args, {"error": "insufficient precision", "message": str(exc), "deficit": getattr(exc, "deficit", None)})
        return EXIT_PRECISION
    except (ModelError, KNError) as exc:
        print(f"kn: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"kn: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
