"""Symbolic execution of method effects over generated symbolic heaps.

A symbolic configuration has the same shape as a runtime one, except that
int slots hold formula terms. ``gen`` builds the starting heap for an
ordered method pair under an alias case: every block of aliased roles gets
one object whose int fields are fresh symbols (tagged weak or strong) and
whose object fields point to freshly generated, never-aliased objects.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import count
from typing import Iterator, Optional

from .bounds import BoundedDomain
from .effects import (
    Effect,
    Enew,
    Eop,
    EretField,
    EretVal,
    EretVar,
    Evar,
    VbindC,
    VbindL,
    Vfield,
    _Fresh,
    infer_method_effect,
)
from .formula import (
    PARAM,
    STRONG,
    WEAK,
    Cmp,
    Op,
    Sym,
    conj,
    sat_bounded,
    show,
    show_term,
)
from .interp import init_value
from .syntax import INT, BinOp, Expr, Loc, MethodDecl, Program, Select, Val, Var

SEP = "|"  # separates the two methods' entries in a strong log
GEN_DEPTH = 3


class SymbolicError(Exception):
    pass


def sanitize(name: str) -> str:
    s = re.sub(r"[^A-Za-z0-9_]", "_", name).lstrip("_")
    return s or "v"


# -- alias cases ---------------------------------------------------------------


@dataclass(frozen=True)
class AliasCase:
    """A partition of the reserved roles; roles in one block share a location."""

    blocks: tuple[tuple[str, ...], ...]

    def same(self, a: str, b: str) -> bool:
        return any(a in blk and b in blk for blk in self.blocks)

    @property
    def roles(self) -> tuple[str, ...]:
        return tuple(r for blk in self.blocks for r in blk)

    def __str__(self) -> str:
        return "|".join("=".join(b) for b in self.blocks)

    @classmethod
    def parse(cls, text: str) -> "AliasCase":
        blocks = tuple(tuple(r.strip() for r in b.split("=")) for b in text.split("|"))
        return cls(_canonical(blocks))


_ROLE_ORDER = {"this1": 0, "this2": 1, "other1": 2, "other2": 3}


def _canonical(blocks) -> tuple[tuple[str, ...], ...]:
    bs = [tuple(sorted(b, key=_ROLE_ORDER.get)) for b in blocks]
    return tuple(sorted(bs, key=lambda b: _ROLE_ORDER[b[0]]))


def _partitions(items: list) -> Iterator[list[list]]:
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
        yield [[head]] + part


def pair_roles(p: Program, cname: str, md1: MethodDecl, md2: Optional[MethodDecl]) -> dict:
    """Role -> class for the reserved locations of a (single or paired) call."""
    roles = {"this1": cname}
    if p.cls(md1.param_ty) is not None:
        roles["other1"] = md1.param_ty
    elif md1.param_ty != INT:
        raise SymbolicError(f"{cname}.{md1.name}: parameter type {md1.param_ty} is not a class")
    if md2 is not None:
        roles["this2"] = cname
        if p.cls(md2.param_ty) is not None:
            roles["other2"] = md2.param_ty
        elif md2.param_ty != INT:
            raise SymbolicError(f"{cname}.{md2.name}: parameter type {md2.param_ty} is not a class")
    return roles


def enumerate_alias_cases(p: Program, cname: str, md1: MethodDecl,
                          md2: Optional[MethodDecl] = None) -> list[AliasCase]:
    """Class-respecting partitions of the roles, coarsest first, deterministic."""
    roles = pair_roles(p, cname, md1, md2)
    names = sorted(roles, key=_ROLE_ORDER.get)
    out = set()
    for part in _partitions(names):
        if all(len({roles[r] for r in blk}) == 1 for blk in part):
            out.add(_canonical(part))
    return [AliasCase(b) for b in sorted(out, key=lambda b: (len(b), b))]


# -- configurations ------------------------------------------------------------


@dataclass
class EConfiguration:
    heap: dict = field(default_factory=dict)  # Loc -> (class, {field: SymValue})
    stack: dict = field(default_factory=dict)
    strong_log: list = field(default_factory=list)
    preconds: list = field(default_factory=list)
    buffer: object = None
    # every (location, field, mode) touched, weak or strong
    access: list = field(default_factory=list)

    def copy(self) -> "EConfiguration":
        return EConfiguration(
            {k: (c, dict(f)) for k, (c, f) in self.heap.items()},
            dict(self.stack),
            list(self.strong_log),
            list(self.preconds),
            self.buffer,
            list(self.access),
        )


@dataclass(frozen=True)
class SymbolInfo:
    role: str
    path: tuple[str, ...]  # object fields followed from the role's location
    field: str
    kind: str  # weak | strong


@dataclass
class ReservedLocations:
    roles: dict  # role -> Loc

    def __getitem__(self, role: str) -> Loc:
        return self.roles[role]

    def get(self, role: str):
        return self.roles.get(role)


@dataclass
class Generated:
    config: EConfiguration
    rho: ReservedLocations
    symbols: dict  # name -> SymbolInfo
    case: AliasCase

    @property
    def weak_syms(self) -> list[Sym]:
        return [Sym(n, WEAK) for n, s in self.symbols.items() if s.kind == WEAK]

    @property
    def strong_syms(self) -> list[Sym]:
        return [Sym(n, STRONG) for n, s in self.symbols.items() if s.kind == STRONG]


def param_symbol(md: MethodDecl, i: int) -> Sym:
    return Sym(f"{sanitize(md.param)}_p{i}", PARAM)


def gen(case: AliasCase, p: Program, roles: dict) -> Generated:
    """The generated symbolic heap for an alias case over the given roles."""
    heap: dict = {}
    symbols: dict = {}
    counter = count(1)
    locs = count(1)

    def make(cname: str, role: str, path: tuple, depth: int) -> Loc:
        if depth > GEN_DEPTH:
            raise SymbolicError(f"object nesting deeper than {GEN_DEPTH} below {role}")
        c = p.cls(cname)
        if c is None:
            raise SymbolicError(f"cannot generate an object of type {cname}")
        loc = Loc(next(locs))
        fields: dict = {}
        heap[loc] = (cname, fields)
        for f in c.fields:
            if f.ty == INT:
                name = f"{sanitize(f.name)}_{next(counter)}"
                kind = WEAK if f.weak else STRONG
                fields[f.name] = Sym(name, kind)
                symbols[name] = SymbolInfo(role, path, f.name, kind)
            else:
                fields[f.name] = make(f.ty, role, path + (f.name,), depth + 1)
        return loc

    rho = {}
    for blk in case.blocks:
        loc = make(roles[blk[0]], blk[0], (), 1)
        for r in blk:
            rho[r] = loc
    return Generated(EConfiguration(heap=heap), ReservedLocations(rho), symbols, case)


# -- stepping ------------------------------------------------------------------


def _locate(cfg: EConfiguration, x: str) -> Loc:
    v = cfg.stack.get(x)
    if not isinstance(v, Loc):
        raise SymbolicError(f"{x} does not denote a location (holds {v!r})")
    return v


def _is_strong(p: Program, cname: str, f: str) -> bool:
    fd = p.cls(cname).field(f)
    return fd is not None and not fd.weak


def _term(cfg: EConfiguration, sv: Expr):
    if isinstance(sv, Val):
        return sv.value
    if isinstance(sv, Var):
        if sv.name in cfg.stack:
            return cfg.stack[sv.name]
        return Sym(sanitize(sv.name), PARAM)
    if isinstance(sv, BinOp):
        return Op(sv.op, _term(cfg, sv.left), _term(cfg, sv.right))
    raise SymbolicError(f"not a symbolic value: {sv!r}")


def _int_term(t):
    if t is None or isinstance(t, Loc) or isinstance(t, bool):
        raise SymbolicError(f"arithmetic on a non-integer value {t!r}")
    return t


def close_value(cfg: EConfiguration, d: Expr):
    if isinstance(d, Val):
        return d.value
    if isinstance(d, Var):
        if d.name not in cfg.stack:
            raise SymbolicError(f"closure: unbound variable {d.name}")
        return cfg.stack[d.name]
    if isinstance(d, Select):
        loc = _locate(cfg, d.obj)
        return cfg.heap[loc][1][d.field]
    raise SymbolicError(f"closure: not an invariant value {d!r}")


def close_preconds(cfg: EConfiguration, cs) -> list[Cmp]:
    return [Cmp(close_value(cfg, c.lhs), c.rel, close_value(cfg, c.rhs)) for c in cs]


def step_symbolic(cfg: EConfiguration, item, p: Program) -> None:
    """Apply one effect instruction to cfg in place."""
    if isinstance(item, EretVal):
        cfg.buffer = item.value
    elif isinstance(item, EretVar):
        cfg.buffer = _term(cfg, Var(item.var))
    elif isinstance(item, EretField):
        loc = _locate(cfg, item.obj)
        cname, fields = cfg.heap[loc]
        cfg.buffer = fields[item.field]
        cfg.access.append((loc, item.field, "r"))
        if _is_strong(p, cname, item.field):
            cfg.strong_log.append((loc, item.field, "r"))
    elif isinstance(item, Eop):
        cfg.buffer = Op(item.op, _int_term(cfg.buffer), _int_term(_term(cfg, item.operand)))
    elif isinstance(item, Enew):
        loc = Loc(max((l.id for l in cfg.heap), default=0) + 1)
        # fresh objects start from the interpreter's initial values
        cfg.heap[loc] = (item.cls, {f.name: init_value(f.ty) for f in item.fields})
        cfg.buffer = loc
    elif isinstance(item, Evar):
        t = item.target
        if isinstance(t, Vfield):
            loc = _locate(cfg, t.obj)
            cname, fields = cfg.heap[loc]
            fields[t.field] = cfg.buffer
            cfg.access.append((loc, t.field, "w"))
            if _is_strong(p, cname, t.field):
                cfg.strong_log.append((loc, t.field, "w"))
        elif isinstance(t, VbindL):
            cfg.stack[t.var] = cfg.buffer
        elif isinstance(t, VbindC):
            cfg.stack[t.var] = cfg.buffer
            cfg.preconds.extend(close_preconds(cfg, t.pre))
        else:
            raise SymbolicError(f"unknown effect variable {t!r}")
        cfg.buffer = None
    else:
        raise SymbolicError(f"unknown effect {item!r}")


def update_s(eff: Effect, cfg: EConfiguration, p: Program,
             dom: Optional[BoundedDomain] = None) -> EConfiguration:
    """Run an effect from cfg (whose preconds already hold the closed top-level ones).

    When dom is given, the accumulated preconditions must be satisfiable over it.
    """
    out = cfg.copy()
    for item in eff.items:
        step_symbolic(out, item, p)
    if dom is not None and out.preconds and sat_bounded(conj(out.preconds), dom) is None:
        raise SymbolicError("preconditions are unsatisfiable: " + show(conj(out.preconds)))
    return out


def run_method(cfg: EConfiguration, p: Program, cname: str, md: MethodDecl, i: int,
               rho: ReservedLocations, dom: Optional[BoundedDomain] = None,
               fresh: Optional[_Fresh] = None) -> tuple[EConfiguration, list[Cmp]]:
    """Run method i of a pair from cfg; returns the new state and its closed preconditions."""
    start = cfg.copy()
    arg = rho.get(f"other{i}")
    start.stack = {"this": rho[f"this{i}"], md.param: arg if arg is not None else param_symbol(md, i)}
    start.buffer = None
    start.preconds = close_preconds(start, md.pre)
    eff = infer_method_effect(md, p, cname, fresh or _Fresh())
    out = update_s(eff, start, p, dom)
    return out, list(out.preconds)


@dataclass
class SymbolicRun:
    generated: Generated
    middle: EConfiguration
    final: EConfiguration
    pre1: list
    pre2: list

    @property
    def log(self) -> list:
        return self.final.strong_log


def symbolic_sequence(p: Program, cname: str, md1: MethodDecl, md2: MethodDecl,
                      case: AliasCase, dom: Optional[BoundedDomain] = None) -> SymbolicRun:
    """md1 then md2 from the generated heap of case; the log carries a separator."""
    g = gen(case, p, pair_roles(p, cname, md1, md2))
    mid, pre1 = run_method(g.config, p, cname, md1, 1, g.rho, dom)
    mid.strong_log.append(SEP)
    fin, pre2 = run_method(mid, p, cname, md2, 2, g.rho, dom)
    return SymbolicRun(g, mid, fin, pre1, pre2)


# -- JSON ----------------------------------------------------------------------


def value_json(v):
    if isinstance(v, Loc):
        return str(v)
    if v is None or isinstance(v, int):
        return v
    return show_term(v)


def econfig_json(cfg: EConfiguration) -> dict:
    return {
        "heap": {str(k): {"class": c, "fields": {f: value_json(v) for f, v in fs.items()}}
                 for k, (c, fs) in sorted(cfg.heap.items())},
        "stack": {x: value_json(v) for x, v in cfg.stack.items()},
        "strong_log": [e if e == SEP else [str(e[0]), e[1], e[2]] for e in cfg.strong_log],
        "preconds": [show(c) for c in cfg.preconds],
    }


def run_json(r: SymbolicRun) -> dict:
    return {
        "alias_case": str(r.generated.case),
        "reserved": {k: str(v) for k, v in r.generated.rho.roles.items()},
        "initial": econfig_json(r.generated.config),
        "final": econfig_json(r.final),
        "pre1": [show(c) for c in r.pre1],
        "pre2": [show(c) for c in r.pre2],
    }
