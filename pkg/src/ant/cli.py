"""Command line interface.

Exit codes: 0 ok, 1 negative verdict (ill-typed program, EXN, anticipation
refused, divergent replicas), 2 error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .analysis import build_table
from .bounds import BoundedDomain
from .effects import EffectError, effect_json, infer_method_effect
from .interp import EXN, InterpError, run, to_json
from .oracle import can_anticipate, field_ok
from .parser import ParseError, parse_program
from .simulate import ScenarioError, build_state, load_scenario_file, objects_from_json, simulate
from .symbolic import GEN_DEPTH, AliasCase, SymbolicError, run_json, symbolic_sequence
from .syntax import INT, Call, Program, Val, Var
from .table import (
    QueryError,
    TableError,
    classify,
    entry_summary,
    load_table,
    query,
    query_entry,
    serialize_table,
)
from .typecheck import check_program

OK, NEGATIVE, ERROR = 0, 1, 2

# position of each oracle check in the anticipation algorithm
STEPS = {"commute": 0, "pres2": 1, "or1": 2, "sfni": 3}


class CliError(Exception):
    pass


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _program(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise CliError(f"cannot read {path}: {err.strerror}") from None
    try:
        return parse_program(text)
    except ParseError as err:
        raise CliError(f"{path}:{err}") from None


def _well_typed(p: Program, path: str) -> None:
    report = check_program(p)
    if not report.ok:
        raise CliError(report.format(path))


def _domain(p: Program) -> BoundedDomain:
    try:
        return BoundedDomain.for_program(p)
    except ValueError as err:
        raise CliError(str(err)) from None


def cmd_check(args) -> int:
    p = _program(args.file)
    report = check_program(p)
    if report.ok:
        print(f"{args.file}: ok")
        return OK
    print(report.format(args.file))
    return NEGATIVE


def cmd_run(args) -> int:
    p = _program(args.file)
    _well_typed(p, args.file)
    try:
        cfg = run(p)
    except InterpError as err:
        raise CliError(str(err)) from None
    _emit(to_json(cfg))
    return NEGATIVE if cfg.thread is EXN else OK


def _method(p: Program, text: str):
    cname, _, mname = text.rpartition(".")
    for c in p.classes:
        if cname and c.name != cname:
            continue
        md = c.method(mname)
        if md is not None:
            return c.name, md
    raise CliError(f"no method {text}")


def cmd_analyze(args) -> int:
    p = _program(args.file)
    _well_typed(p, args.file)
    if args.dump_effects:
        out = {}
        for c in p.classes:
            for md in c.methods:
                try:
                    out[f"{c.name}.{md.name}"] = effect_json(infer_method_effect(md, p, c.name))
                except EffectError as err:
                    out[f"{c.name}.{md.name}"] = {"error": str(err)}
        _emit(out)
        return OK
    dom = _domain(p)
    if args.dump_symbolic:
        if not args.alias:
            raise CliError("--dump-symbolic needs --alias CASE")
        c1, md1 = _method(p, args.dump_symbolic[0])
        c2, md2 = _method(p, args.dump_symbolic[1])
        if c1 != c2:
            raise CliError("both methods must belong to the same class")
        try:
            case = AliasCase.parse(args.alias)
            _emit(run_json(symbolic_sequence(p, c1, md1, md2, case, dom)))
        except (SymbolicError, EffectError, KeyError, IndexError) as err:
            raise CliError(f"symbolic execution failed: {err}") from None
        return OK
    table = build_table(p, dom)
    if args.output:
        Path(args.output).write_bytes(serialize_table(table))
    for cls in table.classes():
        s = table.stats(cls)
        print(f"{cls}: {s.methods} methods, {s.non_lp} non-LP, {s.pairs} pairs, {s.conflicts} conflicts")
        for (c, m), info in sorted(table.methods.items()):
            if c == cls:
                print(f"  {m}: {'LP' if info.lp else 'not LP'}, {classify(table, c, m)}")
        if args.verbose:
            for (c, _m2), row in sorted(table.entries.items()):
                if c == cls:
                    for _k, r in sorted(row.items()):
                        print("  " + entry_summary(r))
    return OK


# -- anticipate ---------------------------------------------------------------------


class _ArgsAction(argparse.Action):
    """--args binds to whichever of --m1/--m2 came last."""

    def __call__(self, parser, namespace, values, option_string=None):
        dest = "args2" if namespace.m2 is not None else "args1"
        setattr(namespace, dest, values)


def _parse_sig(text: str) -> tuple[str, Optional[str], str]:
    """x.m or x:Cls.m -> (receiver, class or None, method)."""
    head, dot, m = text.rpartition(".")
    if not dot or not head or not m:
        raise CliError(f"bad call signature {text!r}, expected x.method or x:Class.method")
    x, _, cname = head.partition(":")
    return x, cname or None, m


def _parse_arg(values: Optional[list]):
    if not values:
        return Val(0)
    if len(values) > 1:
        raise CliError("methods take a single argument")
    v = values[0]
    if v == "null":
        return Val(None)
    try:
        return Val(int(v))
    except ValueError:
        return Var(v)


def _canonical_int(p: Program, cname: str, f: str, dom: BoundedDomain) -> int:
    order = sorted(dom, key=lambda v: (abs(v), v < 0))
    return next((v for v in order if field_ok(p, cname, f, {f: v})), 0)


def synthesize_state(p: Program, receivers: dict, dom: BoundedDomain):
    """Fresh, distinct objects for the named variables.

    Integer fields take the smallest-magnitude value satisfying their
    invariants; object fields point to further fresh objects.
    """
    objects: dict = {}

    def make(name: str, cname: str, depth: int) -> None:
        fields: dict = {}
        objects[name] = (cname, fields)
        for fd in p.fields(cname):
            if fd.ty == INT:
                fields[fd.name] = _canonical_int(p, cname, fd.name, dom)
            elif p.is_class(fd.ty) and depth < GEN_DEPTH:
                sub = f"{name}_{fd.name}"
                make(sub, fd.ty, depth + 1)
                fields[fd.name] = sub

    for x, cname in receivers.items():
        make(x, cname, 0)
    return build_state(p, objects)


def _infer_class(p: Program, mname: str) -> str:
    owners = [c.name for c in p.classes if c.method(mname) is not None]
    if len(owners) != 1:
        raise CliError(f"cannot tell which class {mname} belongs to; write x:Class.{mname}")
    return owners[0]


def cmd_anticipate(args) -> int:
    if args.m1 is None or args.m2 is None:
        raise CliError("both --m1 and --m2 are required")
    sigs = [_parse_sig(args.m1), _parse_sig(args.m2)]
    calls = [Call(x, m, _parse_arg(a)) for (x, _c, m), a in zip(sigs, (args.args1, args.args2))]
    p = _program(args.program) if args.program else None
    if p is not None:
        _well_typed(p, args.program)
    if args.state:
        try:
            data = json.loads(Path(args.state).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise CliError(f"cannot read {args.state}: {err}") from None
        if p is None:
            raise CliError("--state needs --program to resolve classes")
        state = build_state(p, objects_from_json(data.get("objects", data)))
    else:
        if p is None:
            raise CliError("without --state, --program is needed to build a default state")
        receivers: dict = {}
        for (x, cname, m), mc in zip(sigs, calls):
            cname = cname or receivers.get(x) or _infer_class(p, m)
            receivers.setdefault(x, cname)
            md = p.lookup_method(cname, m)
            if isinstance(mc.arg, Var) and mc.arg.name not in receivers:
                if not p.is_class(md.param_ty):
                    raise CliError(f"{m} takes {md.param_ty}; pass an object of a class")
                receivers[mc.arg.name] = md.param_ty
        state = synthesize_state(p, receivers, _domain(p))
    if args.runtime:
        if p is None:
            raise CliError("--runtime needs --program")
        v = can_anticipate(calls[0], calls[1], state, p, _domain(p))
        out = {"anticipate": v.ok}
        if not v.ok:
            out.update(step=STEPS[v.failed], check=v.failed, witness=v.witness)
        _emit(out)
        return OK if v.ok else NEGATIVE
    if not args.table:
        raise CliError("--table is required unless --runtime is given")
    try:
        table = load_table(Path(args.table).read_bytes())
    except OSError as err:
        raise CliError(f"cannot read {args.table}: {err.strerror}") from None
    r = query_entry(table, calls[0], calls[1], state)
    ok = query(table, calls[0], calls[1], state)
    _emit({"anticipate": ok, "alias": str(r.case), "verdict": r.verdict, "entry": entry_summary(r)})
    return OK if ok else NEGATIVE


def cmd_simulate(args) -> int:
    sc = load_scenario_file(args.scenario)
    try:
        table = load_table(Path(args.table).read_bytes())
    except OSError as err:
        raise CliError(f"cannot read {args.table}: {err.strerror}") from None
    from .analysis import program_hash

    if table.program_hash and table.program_hash != program_hash(sc.program):
        raise CliError("the table was built for a different program")
    report = simulate(sc, table)
    _emit(report.to_json())
    return OK if report.converged else NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ant", description="ANT-OOlong tools and anticipation analysis")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse and type check a program")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("run", help="run a program's main expression")
    c.add_argument("file")
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("analyze", help="build the anticipation table")
    c.add_argument("file")
    c.add_argument("-o", "--output", help="write the table as JSON")
    c.add_argument("-v", "--verbose", action="store_true", help="list every table entry")
    c.add_argument("--dump-effects", action="store_true", help="print inferred method effects")
    c.add_argument("--dump-symbolic", nargs=2, metavar=("M1", "M2"),
                   help="print the symbolic run of M1 then M2")
    c.add_argument("--alias", help="alias case for --dump-symbolic, e.g. this1=this2")
    c.set_defaults(func=cmd_analyze)

    c = sub.add_parser("anticipate", help="may the call of --m2 run before the call of --m1?")
    c.add_argument("--table", help="table JSON written by analyze -o")
    c.add_argument("--program", help="program source (for --runtime and default states)")
    c.add_argument("--m1", help="first call, x.method or x:Class.method")
    c.add_argument("--m2", help="second call, anticipated over the first")
    c.add_argument("--args", nargs="*", action=_ArgsAction, metavar="ARG",
                   help="argument of the preceding --m1/--m2: an int, null or an object name")
    c.add_argument("--state", help="state JSON: {\"objects\": {name: {\"class\": C, \"fields\": {...}}}}")
    c.add_argument("--runtime", action="store_true", help="use the runtime oracle instead of the table")
    c.set_defaults(func=cmd_anticipate, args1=None, args2=None)

    c = sub.add_parser("simulate", help="replay a replica scenario")
    c.add_argument("--table", required=True)
    c.add_argument("scenario")
    c.set_defaults(func=cmd_simulate)
    return ap


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, TableError, QueryError, ScenarioError, KeyError) as err:
        msg = err.args[0] if isinstance(err, KeyError) and err.args else err
        print(f"ant: error: {msg}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
