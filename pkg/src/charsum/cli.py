"""charsum command line.

Exit codes: 0 ok, 1 identity or fit failure, 2 usage error, 3 budget exceeded.
Every failure prints a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from . import analytic, classical, lfunction, twisted, verify
from .config import DEFAULT_BUDGETS, SizeLimitError, all_budgets, set_budget
from .ffarith import (
    InvalidModulusError,
    MultChar,
    NotInvertibleError,
    UnsupportedModulusError,
    enumerate_characters,
    jacobi_character,
)

SCHEMA_VERSION = 1

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

TABLE_HELP = """\
table kinds and CSV columns:
  g_values          psi_index, kind, order, re, im          (--p)
  weights           psi_index, kind, terms, recurrence_order, held_out_residual, pass, weights, roots  (--p [--terms])
  moment_breakdown  c, S(c), c^-2 S(c), cumulative_total    (--q --k)
  eta_coeffs        n, a(n)                                 (--N)
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit_error(kind: str, message: str, code: int) -> int:
    obj = {"schema_version": SCHEMA_VERSION, "error": {"type": kind, "message": message, "exit_code": code}}
    print(json.dumps(obj, sort_keys=True), file=sys.stderr)
    return code


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _envelope(command: str, params: dict, body: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "params": params, "budgets": all_budgets(), **body}


def _char(q: int, index: int) -> MultChar:
    chars = enumerate_characters(q)
    if not 0 <= index < len(chars):
        raise UsageError(f"character index {index} out of range 0..{len(chars) - 1}")
    return chars[index]


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------


def cmd_sum(args) -> int:
    kind = args.kind
    if kind == "kloosterman":
        params = {"m": args.m, "n": args.n, "c": args.c}
        val = classical.kloosterman(args.m, args.n, args.c)
    elif kind == "gauss":
        params = {"q": args.q, "psi": args.psi}
        chi = jacobi_character(args.q) if args.psi is None else _char(args.q, args.psi)
        val = classical.gauss_sum(chi)
    elif kind == "ramanujan":
        params = {"m": args.m, "q": args.q}
        val = classical.ramanujan_sum(args.m, args.q, args.method)
    elif kind == "H":
        params = {"w": args.w, "q": args.q, "reduced": args.reduced}
        val = twisted.H_sum(args.w, args.q, reduced=args.reduced)
    elif kind == "g":
        params = {"q": args.q, "psi": args.psi or 0, "trivial_is_one": not args.dirichlet}
        val = twisted.g_hybrid(jacobi_character(args.q), _char(args.q, args.psi or 0), args.q, trivial_is_one=not args.dirichlet)
    else:  # G
        params = {"m": args.m, "m1": args.m1, "m2": args.m2, "q": args.q, "r": args.r, "method": args.method}
        if args.method == "closed_form":
            val = twisted.G_closed(args.m, args.m1, args.m2, args.q, args.r)
        else:
            val = twisted.G_brute(args.m, args.m1, args.m2, args.q, args.r)
    out = _envelope("sum", {"kind": kind, **params}, {"value": val.to_dict()})
    if args.format == "text":
        _write(f"{kind} {params}: {val.value.real:.12g} {val.value.imag:+.12g}i", args.output)
    elif args.format == "csv":
        _write(_csv(["kind", "re", "im", "abs_error", "method"], [[kind, repr(val.value.real), repr(val.value.imag), repr(val.abs_error), val.method]]), args.output)
    else:
        _write(_dump(out), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify.run_suite(args.scope, workers=args.workers)
    if args.format == "text":
        lines = [f"{'PASS' if r['pass'] else 'FAIL'} {r['identity']} dev={r['deviation']:.3g} tol={r['tolerance']:.3g}" for r in report["results"]]
        s = report["summary"]
        lines.append(f"{s['passed']}/{s['total']} passed")
        text = "\n".join(lines) + "\n"
    else:
        text = _dump(report) + "\n"
    _write(text, args.output)
    if not report["pass"]:
        first = next(r for r in report["results"] if not r["pass"])
        _emit_error("identity_failure", f"{report['summary']['failed']} identities failed; first: {first['identity']} {json.dumps(first['params'], sort_keys=True)}", EXIT_FAIL)
        return EXIT_FAIL
    return EXIT_OK


def cmd_lfit(args) -> int:
    M = args.terms
    if M < 3:
        raise UsageError("--terms must be >= 3")
    fit = lfunction.lfit(args.p, args.psi, M, args.dmax)
    out = _envelope("lfit", {"p": args.p, "psi": args.psi, "terms": M, "dmax": args.dmax}, {"fit": fit.to_dict()})
    _write(_dump(out), args.output)
    if not fit.passed:
        return _emit_error("fit_failure", "no recurrence order reached the residual threshold", EXIT_FAIL)
    return EXIT_OK


def _mapper(workers: int):
    if workers > 1:
        ex = ProcessPoolExecutor(max_workers=workers)
        return ex, ex.map
    return None, map


def _moment(args) -> analytic.MomentReport:
    cfg = analytic.MomentConfig(args.q, args.k, args.N_max, args.C_max, args.d_max)
    ex, mp = _mapper(args.workers)
    try:
        return analytic.cubic_moment_rhs(cfg, mapper=mp)
    finally:
        if ex is not None:
            ex.shutdown()


def cmd_moment(args) -> int:
    rep = _moment(args)
    if args.format == "csv":
        _write(rep.to_csv(), args.output)
    else:
        _write(rep.to_json() + "\n", args.output)
    if args.csv:
        _write(rep.to_csv(), args.csv)
    return EXIT_OK


def cmd_table(args) -> int:
    kind = args.kind
    if kind == "g_values":
        _need(args, "p")
        chi = jacobi_character(args.p)
        header = ["psi_index", "kind", "order", "re", "im"]
        rows = []
        for i, psi in enumerate(enumerate_characters(args.p)):
            v = twisted.g_hybrid(chi, psi, args.p).value
            rows.append([i, psi.kind, psi.order, repr(round(v.real, 9) + 0.0), repr(round(v.imag, 9) + 0.0)])
    elif kind == "weights":
        _need(args, "p")
        header = ["psi_index", "kind", "terms", "recurrence_order", "held_out_residual", "pass", "weights", "roots"]
        rows = []
        for row in lfunction.weight_audit(args.p, args.terms):
            f = row["fit"]
            rows.append([row["psi_index"], row["kind"], len(f.sequence), f.recurrence_order, repr(f.residual), f.passed,
                         ";".join(f"{w:.6f}" for w in f.weights),
                         ";".join(f"{r.real:.6f}{r.imag:+.6f}i" for r in f.reciprocal_roots)])
    elif kind == "moment_breakdown":
        _need(args, "q")
        rep = _moment(args)
        if args.format == "json":
            _write(_dump(_envelope("table", {"kind": kind, "q": args.q, "k": args.k}, {"report": rep.to_dict(), "rows": [list(r) for r in rep.breakdown]})), args.output)
        else:
            _write(rep.to_csv(), args.output)
        return EXIT_OK
    elif kind == "eta_coeffs":
        _need(args, "N")
        a = twisted.eta6_coefficients(args.N)
        header = ["n", "a(n)"]
        rows = [[i + 1, v] for i, v in enumerate(a)]
    else:
        raise UsageError(f"unknown table kind {kind!r}")
    if args.format == "json":
        _write(_dump(_envelope("table", {"kind": kind}, {"columns": header, "rows": rows})), args.output)
    else:
        _write(_csv(header, rows), args.output)
    return EXIT_OK


def _need(args, name):
    if getattr(args, name, None) is None:
        raise UsageError(f"--{name} is required for table {args.kind}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--budget", action="append", default=[], metavar="NAME=VALUE",
                        help=f"override a size budget ({', '.join(DEFAULT_BUDGETS)})")
    common.add_argument("--output", "-o", default=None, help="write the main output here instead of stdout")

    ap = _Parser(prog="charsum", description="Character sums, Kloosterman sums and cubic-moment numerics.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sum", parents=[common], help="evaluate a single sum")
    s.add_argument("kind", choices=("kloosterman", "gauss", "ramanujan", "H", "g", "G"))
    for name in ("m", "n", "c", "q", "w", "m1", "m2", "psi"):
        s.add_argument(f"--{name}", type=int)
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--reduced", action="store_true", help="H*: restrict to (uv-1, q) = 1")
    s.add_argument("--dirichlet", action="store_true", help="g: evaluate the trivial psi with psi(0) = 0")
    s.add_argument("--method", choices=("brute", "closed_form"), default="brute")

    v = sub.add_parser("verify", parents=[common], help="run identity suites")
    v.add_argument("--scope", choices=verify.SCOPES + ("all",), required=True)

    lf = sub.add_parser("lfit", parents=[common], help="fit L(T) for one character mod p")
    lf.add_argument("--p", type=int, required=True)
    lf.add_argument("--psi", type=int, required=True)
    lf.add_argument("--terms", type=int, required=True)
    lf.add_argument("--dmax", type=int, default=lfunction.D_MAX)

    mo = sub.add_parser("moment", parents=[common], help="cubic moment right-hand side")
    mo.add_argument("--q", type=int, required=True)
    mo.add_argument("--k", type=int, default=12)
    mo.add_argument("--N-max", dest="N_max", type=int)
    mo.add_argument("--C-max", dest="C_max", type=int)
    mo.add_argument("--d-max", dest="d_max", type=int)
    mo.add_argument("--csv", default=None, help="also write the per-c breakdown CSV here")

    t = sub.add_parser("table", parents=[common], help="emit a data table", epilog=TABLE_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    t.add_argument("kind", help="g_values | weights | moment_breakdown | eta_coeffs")
    t.add_argument("--p", type=int)
    t.add_argument("--q", type=int)
    t.add_argument("--k", type=int, default=12)
    t.add_argument("--N", type=int)
    t.add_argument("--terms", type=int)
    t.add_argument("--N-max", dest="N_max", type=int)
    t.add_argument("--C-max", dest="C_max", type=int)
    t.add_argument("--d-max", dest="d_max", type=int)
    return ap


DEFAULT_FORMAT = {"sum": "json", "verify": "json", "lfit": "json", "moment": "json", "table": "csv"}
HANDLERS = {"sum": cmd_sum, "verify": cmd_verify, "lfit": cmd_lfit, "moment": cmd_moment, "table": cmd_table}


def _validate(args) -> None:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    for item in args.budget:
        name, sep, value = item.partition("=")
        if not sep or name not in DEFAULT_BUDGETS:
            raise UsageError(f"bad --budget {item!r}")
        try:
            set_budget(name, int(value))
        except ValueError:
            raise UsageError(f"bad --budget value {item!r}") from None
    if args.command == "sum":
        need = {
            "kloosterman": ("m", "n", "c"),
            "gauss": ("q",),
            "ramanujan": ("m", "q"),
            "H": ("w", "q"),
            "g": ("q",),
            "G": ("m", "m1", "m2", "q"),
        }[args.kind]
        missing = [n for n in need if getattr(args, n) is None]
        if missing:
            raise UsageError(f"sum {args.kind} needs --{', --'.join(missing)}")
        for n in ("c", "q"):
            if n in need and getattr(args, n) < 1:
                raise UsageError(f"--{n} must be positive")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.format = args.format or DEFAULT_FORMAT[args.command]
        _validate(args)
        return HANDLERS[args.command](args)
    except UsageError as e:
        return _emit_error("usage", str(e), EXIT_USAGE)
    except SizeLimitError as e:
        return _emit_error("budget_exceeded", str(e), EXIT_BUDGET)
    except analytic.ParityError as e:
        return _emit_error("parity", str(e), EXIT_USAGE)
    except (InvalidModulusError, UnsupportedModulusError, NotInvertibleError, ValueError) as e:
        return _emit_error(type(e).__name__, str(e), EXIT_USAGE)
    except Exception as e:  # noqa: BLE001 - last resort, still machine readable
        return _emit_error("internal", f"{type(e).__name__}: {e}", EXIT_FAIL)


if __name__ == "__main__":
    sys.exit(main())
