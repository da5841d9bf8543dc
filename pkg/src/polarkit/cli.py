"""Command-line driver: check, run and elaborate `.pol` programs."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .diagnostics import PolarError
from .eval import DEFAULT_FUEL, EvalError
from .pipeline import load_program
from .pretty import show

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_USAGE = 0, 1, 2


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("fuel must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fuel", type=_positive, default=DEFAULT_FUEL, help="reduction step budget")
    common.add_argument("--json", action="store_true", help="emit diagnostics as JSON lines")
    common.add_argument("--explain-conv", action="store_true", help="print the conversion trace to stderr")
    common.add_argument("--explain-unify", action="store_true", help="print the index-unification trace to stderr")
    common.add_argument("--trace-json", action="store_true", help="print traces as JSON lines (both traces unless one is selected)")
    common.add_argument("--no-prelude", action="store_true", help="do not prepend the standard prelude")

    p = argparse.ArgumentParser(prog="polarkit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", parents=[common], help="typecheck files")
    c.add_argument("files", nargs="+")
    r = sub.add_parser("run", parents=[common], help="typecheck, then evaluate a top-level let")
    r.add_argument("files", nargs="+")
    r.add_argument("name")
    e = sub.add_parser("elaborate", parents=[common], help="print the program with implicit arguments filled in")
    e.add_argument("files", nargs="+")
    return p


def _emit_traces(args, conv_trace: list, unify_trace: list, err) -> None:
    if args.explain_conv:
        for entry in conv_trace:
            if args.trace_json:
                print(json.dumps({"kind": "conv", **entry}, ensure_ascii=False, sort_keys=True), file=err)
            else:
                line = entry["rule"] + (f": {entry['constraint']}" if "constraint" in entry else "")
                if "detail" in entry:
                    line += f"  [{entry['detail']}]"
                print(line, file=err)
    if args.explain_unify:
        for line in unify_trace:
            if args.trace_json:
                rule, _, problem = line.partition(": ")
                print(json.dumps({"kind": "unify", "rule": rule, "problem": problem}, ensure_ascii=False, sort_keys=True), file=err)
            else:
                print(line, file=err)


def main(argv: Optional[list] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    if args.trace_json and not (args.explain_conv or args.explain_unify):
        # a bare --trace-json asks for both traces
        args.explain_conv = args.explain_unify = True
    conv_trace: Optional[list] = [] if args.explain_conv else None
    unify_trace: Optional[list] = [] if args.explain_unify else None
    try:
        prog = load_program(
            args.files, prelude=not args.no_prelude, fuel=args.fuel, conv_trace=conv_trace, unify_trace=unify_trace
        )
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    _emit_traces(args, conv_trace or [], unify_trace or [], err)

    if prog.diagnostics:
        for d in prog.diagnostics:
            print(d.dumps() if args.json else d.render(), file=out if args.json else err)
        return EXIT_DIAGNOSTICS

    match args.command:
        case "check":
            if not args.json:
                print("ok", file=out)
        case "run":
            if args.name not in prog.genv.lets:
                print(f"error: no top-level let named {args.name}", file=err)
                return EXIT_USAGE
            try:
                value = prog.evaluate(args.name, args.fuel)
            except (EvalError, PolarError) as exc:
                code = getattr(exc, "code", "EvalError")
                print(f"error[{code}]: {exc}", file=err)
                return EXIT_DIAGNOSTICS
            print(show(value), file=out)
        case "elaborate":
            out.write(prog.elaborated_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
