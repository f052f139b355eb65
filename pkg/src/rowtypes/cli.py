"""Command-line driver: check, eval, sub and tally.

Exit codes: 0 success, 1 type error / negative verdict / no solution,
2 parse or kind error.  With ``--machine`` every result is printed as one
JSON object per line with the keys ``kind``, ``verdict``, ``type`` and
``substitutions`` (plus ``name`` or ``error`` where relevant).
"""
from __future__ import annotations

import argparse
import json
import random
import sys

from .core import ContractivityError, KindError, Store
from .eval import Diverged, Value, evaluate, show_expr, substitute
from .frontend import ParseError, parse_type, parse_unit, show
from .subtype import is_equiv, is_subtype
from .tally import Constraint, Fuel, FuelExhausted, tally, verify
from .typing import Options, check_declarations

OK, FAIL, BAD_INPUT = 0, 1, 2


class Output:
    def __init__(self, machine: bool, stream=None):
        self.machine = machine
        self.stream = stream or sys.stdout

    def emit(self, text: str, kind: str, verdict, type=None, substitutions=None, **extra):
        if self.machine:
            rec = {"kind": kind, "verdict": verdict, "type": type,
                   "substitutions": substitutions or []}
            rec.update(extra)
            print(json.dumps(rec, sort_keys=True), file=self.stream)
        else:
            print(text, file=self.stream)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _options(args) -> Options:
    return Options(mode=args.mode, max_card=args.max_card, budget=args.budget,
                   fuel=args.fuel, all_solutions=args.all_solutions)


def cmd_check(args, out: Output) -> int:
    store = Store()
    unit = parse_unit(store, _read(args.file))
    results = check_declarations(store, unit.declarations, _options(args))
    code = OK
    for r in results:
        if r.error is not None:
            code = FAIL
            out.emit(f"{r.name} : error {r.error}", "check", False, name=r.name,
                     error=str(r.error))
        else:
            out.emit(f"{r.name} : {show(r.type)}", "check", True, show(r.type), name=r.name)
    if args.all_solutions:
        from .typing import Checker
        checker = Checker(store, _options(args))
        _retrace(checker, unit.declarations, out)
    return code


def _retrace(checker, decls, out: Output):
    """Re-run the checker to list applications with several candidate result types."""
    from .typing import TypeCheckError, TypeEnv
    env = TypeEnv()
    for d in decls:
        try:
            t = checker.type_of(env, d.expr)
        except TypeCheckError:
            continue
        env = env.bind(d.name, d.annot if d.annot is not None else t)
    for f, x, found in checker.alternatives:
        types = [show(t) for t in found]
        out.emit(f"  {show(f)} applied to {show(x)}: " + " ; ".join(types),
                 "alternatives", True, types)


def cmd_eval(args, out: Output) -> int:
    store = Store()
    unit = parse_unit(store, _read(args.file))
    defs = {}
    code = OK

    def close(e):
        for name, v in reversed(list(defs.items())):
            e = substitute(e, name, v)
        return e

    for d in unit.declarations:
        r = evaluate(close(d.expr), args.fuel)
        if isinstance(r, Value):
            defs[d.name] = r.value
        else:
            defs[d.name] = close(d.expr)
    for q in unit.queries:
        if q.kind != "eval":
            continue
        r = evaluate(close(q.args[0]), args.fuel)
        if isinstance(r, Value):
            out.emit(show_expr(r.value), "eval", "value", value=show_expr(r.value))
        elif isinstance(r, Diverged):
            code = FAIL
            out.emit(f"diverged after {r.steps} steps", "eval", "diverged")
        else:
            code = FAIL
            out.emit(f"stuck at {show_expr(r.term)}", "eval", "stuck", value=show_expr(r.term))
    return code


def cmd_sub(args, out: Output) -> int:
    store = Store()
    pairs = []
    if args.file:
        for q in parse_unit(store, _read(args.file)).queries:
            if q.kind in ("sub", "equiv"):
                pairs.append((q.args[0], q.args[2], q.kind == "equiv"))
    else:
        if not args.types or len(args.types) != 2:
            raise ParseError("sub expects two types or --file")
        t1, t2 = (parse_type(store, t) for t in args.types)
        pairs.append((t1, t2, args.equiv))
    code = OK
    for t1, t2, both in pairs:
        verdict = is_equiv(t1, t2) if both else is_subtype(t1, t2)
        op = "==" if both else "<="
        out.emit(f"{show(t1)} {op} {show(t2)} : {str(verdict).lower()}" if args.file
                 else str(verdict).lower(), "equiv" if both else "sub", verdict)
        if not verdict:
            code = FAIL
    return code


def cmd_tally(args, out: Output) -> int:
    store = Store()
    unit = parse_unit(store, _read(args.file))
    cs, delta = [], set()
    for q in unit.queries:
        if q.kind == "constraint":
            cs.append(Constraint(q.args[0], q.args[1], q.args[2]))
        elif q.kind == "mono":
            delta.update(q.args)
    for name in args.mono:
        tag = {"'": "type", "?": "field", "@": "row"}.get(name[:1])
        v = store.lookup_var(name[1:], tag) if tag else None
        if v is None:
            raise ParseError(f"--mono {name}: no such variable in {args.file}")
        delta.add(v)
    try:
        sols = tally(cs, delta, fuel=Fuel(args.fuel), keep_empty=args.keep_empty)
    except FuelExhausted as exc:
        out.emit(f"gave up: {exc}", "tally", "fuel")
        return FAIL
    if not sols:
        out.emit("no solution", "tally", False)
        return FAIL
    code = OK
    shown = sols if args.all_solutions or len(sols) > 1 else sols[:1]
    for sigma in shown:
        good = verify(sigma, cs)
        binds = {repr(v): show(t) for v, t in sorted(sigma.items(), key=lambda p: p[0].index)}
        mark = "ok" if good else "VIOLATED"
        out.emit(f"{sigma!r}  [{mark}]", "tally", good, substitutions=[binds])
        if args.verify and not good:
            print(f"error: substitution {sigma!r} does not solve the constraints",
                  file=sys.stderr)
            code = FAIL
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rowtypes", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("practical", "complete"), default="practical")
    common.add_argument("--max-card", type=int, default=2,
                        help="largest number of instances tried for an instantiation")
    common.add_argument("--budget", type=int, default=4,
                        help="dove-tail budget for typing applications")
    common.add_argument("--fuel", type=int, default=200_000,
                        help="step budget for tallying and evaluation")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--machine", action="store_true", help="JSON lines output")
    common.add_argument("--all-solutions", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="type-check the definitions of a file")
    c.add_argument("file")
    c.set_defaults(run=cmd_check)

    e = sub.add_parser("eval", parents=[common], help="evaluate the eval statements of a file")
    e.add_argument("file")
    e.set_defaults(run=cmd_eval)

    s = sub.add_parser("sub", parents=[common], help="decide subtyping")
    s.add_argument("types", nargs="*")
    s.add_argument("--file", "-f")
    s.add_argument("--equiv", action="store_true", help="check both directions")
    s.set_defaults(run=cmd_sub)

    t = sub.add_parser("tally", parents=[common], help="solve the constraints of a file")
    t.add_argument("file")
    t.add_argument("--verify", action="store_true", help="fail if a solution does not verify")
    t.add_argument("--mono", action="append", default=[], metavar="VAR",
                   help="treat a variable ('a, ?f or @r) as monomorphic; repeatable")
    t.add_argument("--keep-empty", action="store_true",
                   help="also report solutions mapping a variable to an empty term")
    t.set_defaults(run=cmd_tally)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    random.seed(args.seed)
    if args.max_card < 1 or args.budget < 2 or args.fuel < 1:
        parser.error("--max-card and --fuel must be at least 1, --budget at least 2")
    out = Output(args.machine)
    try:
        return args.run(args, out)
    except (ParseError, KindError, ContractivityError) as exc:
        if args.machine:
            out.emit("", args.command, None, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
