"""Small-step interpreter with precondition monitoring and strong-field logging.

``step`` implements the reduction rules one redex at a time. ``update`` runs a
single call to completion using an equivalent direct evaluator (same
evaluation order, same fresh names, same logs), which is what the runtime
oracle uses in its inner loops. Tests check both routes agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .syntax import (
    EXN,
    INT,
    INT64_MAX,
    INT64_MIN,
    BinOp,
    Call,
    Cast,
    Expr,
    Invariant,
    Let,
    Loc,
    New,
    Program,
    Select,
    Update,
    Val,
    Var,
    arith,
    is_value,
    rename,
)

DEFAULT_BUDGET = 10**6

Heap = dict  # Loc -> (class name, {field: value})
Stack = dict  # str -> value


class InterpError(Exception):
    """The configuration is stuck or the step budget ran out."""


class ExnError(InterpError):
    """Evaluation reached EXN (null dereference, division by zero, overflow)."""


class _Exn(Exception):
    pass


def init_value(t: str):
    return 0 if t == INT else None


@dataclass
class Configuration:
    heap: Heap = field(default_factory=dict)
    stack: Stack = field(default_factory=dict)
    strong_log: list = field(default_factory=list)
    monitored: list = field(default_factory=list)
    thread: Union[Expr, object] = Val(None)
    fresh: int = 0

    def copy(self) -> "Configuration":
        return Configuration(
            {k: (c, dict(f)) for k, (c, f) in self.heap.items()},
            dict(self.stack),
            list(self.strong_log),
            list(self.monitored),
            self.thread,
            self.fresh,
        )

    def state(self) -> "Configuration":
        """Copy with an empty thread."""
        c = self.copy()
        c.thread = Val(None)
        return c

    def fresh_name(self, base: str) -> str:
        self.fresh += 1
        return f"{base.split(chr(39))[0]}'{self.fresh}"

    def fresh_loc(self) -> Loc:
        n = max((l.id for l in self.heap), default=0)
        return Loc(n + 1)

    @property
    def result(self):
        t = self.thread
        return t.value if isinstance(t, Val) else t


def _checked(n: int) -> int:
    if not INT64_MIN <= n <= INT64_MAX:
        raise _Exn("arithmetic overflow")
    return n


def _is_strong(program: Program, cname: str, f: str) -> bool:
    fd = program.cls(cname).field(f)
    return fd is not None and not fd.weak


def closure(heap: Heap, stack: Stack, cs) -> list[Invariant]:
    """Close preconditions: variables through the stack, selections through the heap."""
    return [Invariant(_close(heap, stack, c.lhs), c.rel, _close(heap, stack, c.rhs)) for c in cs]


def _close(heap: Heap, stack: Stack, d: Expr) -> Val:
    if isinstance(d, Val):
        return d
    if isinstance(d, Var):
        if d.name not in stack:
            raise InterpError(f"closure: unbound variable {d.name}")
        return Val(stack[d.name])
    if isinstance(d, Select):
        if d.obj not in stack:
            raise InterpError(f"closure: unbound variable {d.obj}")
        loc = stack[d.obj]
        if loc not in heap or d.field not in heap[loc][1]:
            raise InterpError(f"closure: cannot resolve {d.obj}.{d.field}")
        return Val(heap[loc][1][d.field])
    raise InterpError(f"closure: not an invariant value: {d!r}")


# -- small-step --------------------------------------------------------------


def _deref(cfg: Configuration, x: str):
    if x not in cfg.stack:
        raise InterpError(f"unbound variable {x}")
    loc = cfg.stack[x]
    if loc is None:
        raise _Exn(f"null dereference of {x}")
    if loc not in cfg.heap:
        raise InterpError(f"dangling location {loc}")
    return loc


def _reduce(cfg: Configuration, e: Expr, p: Program) -> Expr:
    """Reduce the leftmost-innermost redex of e, mutating cfg's state."""
    if isinstance(e, Var):  # dynEvalVar
        if e.name not in cfg.stack:
            raise InterpError(f"unbound variable {e.name}")
        return Val(cfg.stack[e.name])
    if isinstance(e, BinOp):
        if not isinstance(e.left, Val):
            return BinOp(e.op, _reduce(cfg, e.left, p), e.right)
        if not isinstance(e.right, Val):
            return BinOp(e.op, e.left, _reduce(cfg, e.right, p))
        a, b = e.left.value, e.right.value
        if not (isinstance(a, int) and isinstance(b, int)):
            raise InterpError(f"non-integer operands to {e.op}")
        if e.op == "/" and b == 0:
            raise _Exn("division by zero")
        return Val(_checked(arith(e.op, a, b)))  # dynEvalOp
    if isinstance(e, Select):  # dynEvalSelect
        loc = _deref(cfg, e.obj)
        cname, fields = cfg.heap[loc]
        if e.field not in fields:
            raise InterpError(f"{cname} has no field {e.field}")
        if _is_strong(p, cname, e.field):
            cfg.strong_log.append((loc, e.field, "r"))
        return Val(fields[e.field])
    if isinstance(e, Update):
        if not isinstance(e.value, Val):
            return Update(e.obj, e.field, _reduce(cfg, e.value, p))
        loc = _deref(cfg, e.obj)  # dynEvalUpdate
        cname, fields = cfg.heap[loc]
        if e.field not in fields:
            raise InterpError(f"{cname} has no field {e.field}")
        fields[e.field] = e.value.value
        if _is_strong(p, cname, e.field):
            cfg.strong_log.append((loc, e.field, "w"))
        return Val(None)
    if isinstance(e, Call):
        if not isinstance(e.arg, Val):
            return Call(e.obj, e.method, _reduce(cfg, e.arg, p))
        loc = _deref(cfg, e.obj)  # dynEvalCall
        md = p.lookup_method(cfg.heap[loc][0], e.method)
        y = cfg.fresh_name(md.param)
        cfg.stack[y] = e.arg.value
        cfg.monitored.extend(closure(cfg.heap, {"this": loc, md.param: e.arg.value}, md.pre))
        return rename(md.body, {"this": e.obj, md.param: y})
    if isinstance(e, Let):
        if not isinstance(e.init, Val):
            return Let(e.name, _reduce(cfg, e.init, p), e.body)
        x = cfg.fresh_name(e.name)  # dynEvalLet
        cfg.stack[x] = e.init.value
        return rename(e.body, {e.name: x})
    if isinstance(e, New):  # dynEvalNew
        c = p.cls(e.cls)
        if c is None:
            raise InterpError(f"unknown class {e.cls}")
        loc = cfg.fresh_loc()
        cfg.heap[loc] = (c.name, {f.name: init_value(f.ty) for f in c.fields})
        return Val(loc)
    if isinstance(e, Cast):
        if not isinstance(e.expr, Val):
            return Cast(e.ty, _reduce(cfg, e.expr, p))
        return e.expr  # dynEvalCast
    raise InterpError(f"no rule applies to {e!r}")


def is_final(cfg: Configuration) -> bool:
    return cfg.thread is EXN or isinstance(cfg.thread, Val)


def step(cfg: Configuration, p: Program) -> Configuration:
    """One reduction step; returns a new configuration."""
    if is_final(cfg):
        raise InterpError("thread is already a value")
    out = cfg.copy()
    try:
        out.thread = _reduce(out, cfg.thread, p)
    except _Exn:
        out = cfg.copy()
        out.thread = EXN
    return out


def run(p: Program, cfg: Optional[Configuration] = None, budget: int = DEFAULT_BUDGET,
        trace: Optional[list] = None) -> Configuration:
    """Run to a value or EXN with small steps. Records each configuration in trace."""
    if cfg is None:
        cfg = Configuration(thread=p.main)
    n = 0
    while not is_final(cfg):
        if trace is not None:
            trace.append(cfg)
        n += 1
        if n > budget:
            raise InterpError("step budget exceeded")
        cfg = step(cfg, p)
    if trace is not None:
        trace.append(cfg)
    return cfg


# -- direct evaluator --------------------------------------------------------


class _Eval:
    def __init__(self, cfg: Configuration, p: Program, budget: int, access: Optional[set]):
        self.cfg = cfg
        self.p = p
        self.budget = budget
        self.access = access

    def tick(self) -> None:
        self.budget -= 1
        if self.budget < 0:
            raise InterpError("step budget exceeded")

    def var(self, scope: dict, x: str):
        name = scope.get(x, x)
        if name not in self.cfg.stack:
            raise InterpError(f"unbound variable {x}")
        return self.cfg.stack[name]

    def obj(self, scope: dict, x: str):
        loc = self.var(scope, x)
        if loc is None:
            raise _Exn(f"null dereference of {x}")
        return loc

    def ev(self, e: Expr, scope: dict):
        cfg = self.cfg
        if isinstance(e, Val):
            return e.value
        self.tick()
        if isinstance(e, Var):
            return self.var(scope, e.name)
        if isinstance(e, BinOp):
            a = self.ev(e.left, scope)
            b = self.ev(e.right, scope)
            if e.op == "/" and b == 0:
                raise _Exn("division by zero")
            return _checked(arith(e.op, a, b))
        if isinstance(e, Select):
            loc = self.obj(scope, e.obj)
            cname, fields = cfg.heap[loc]
            if self.p.cls(cname).field(e.field).weak:
                if self.access is not None:
                    self.access.add((loc, e.field))
            else:
                cfg.strong_log.append((loc, e.field, "r"))
            return fields[e.field]
        if isinstance(e, Update):
            v = self.ev(e.value, scope)
            loc = self.obj(scope, e.obj)
            cname, fields = cfg.heap[loc]
            fields[e.field] = v
            if self.p.cls(cname).field(e.field).weak:
                if self.access is not None:
                    self.access.add((loc, e.field))
            else:
                cfg.strong_log.append((loc, e.field, "w"))
            return None
        if isinstance(e, Call):
            v = self.ev(e.arg, scope)
            loc = self.obj(scope, e.obj)
            md = self.p.lookup_method(cfg.heap[loc][0], e.method)
            y = cfg.fresh_name(md.param)
            cfg.stack[y] = v
            cfg.monitored.extend(closure(cfg.heap, {"this": loc, md.param: v}, md.pre))
            return self.ev(md.body, {"this": scope.get(e.obj, e.obj), md.param: y})
        if isinstance(e, Let):
            v = self.ev(e.init, scope)
            x = cfg.fresh_name(e.name)
            cfg.stack[x] = v
            inner = dict(scope)
            inner[e.name] = x
            return self.ev(e.body, inner)
        if isinstance(e, New):
            c = self.p.cls(e.cls)
            loc = cfg.fresh_loc()
            cfg.heap[loc] = (c.name, {f.name: init_value(f.ty) for f in c.fields})
            return loc
        if isinstance(e, Cast):
            return self.ev(e.expr, scope)
        raise InterpError(f"no rule applies to {e!r}")


def evaluate(p: Program, cfg: Configuration, e: Expr, budget: int = DEFAULT_BUDGET,
             access: Optional[set] = None) -> Configuration:
    """Evaluate e from cfg's state with the direct evaluator; returns a new configuration.

    The thread of the result is the final value or EXN. ``access`` collects the
    weak (location, field) slots read or written.
    """
    out = cfg.copy()
    try:
        out.thread = Val(_Eval(out, p, budget, access).ev(e, {}))
    except _Exn:
        out.thread = EXN
    except (KeyError, AttributeError, TypeError) as err:
        raise InterpError(f"stuck: {err}") from None
    return out


def update(mc: Call, sigma: Configuration, p: Program, budget: int = DEFAULT_BUDGET,
           access: Optional[set] = None, small_step: bool = False) -> Configuration:
    """Run the call mc to completion from sigma; EXN is reported as ExnError."""
    if small_step:
        cfg = sigma.copy()
        cfg.thread = mc
        out = run(p, cfg, budget)
    else:
        out = evaluate(p, sigma, mc, budget, access)
    if out.thread is EXN:
        raise ExnError(f"{mc.obj}.{mc.method} raised EXN")
    return out


def call(x: str, m: str, v) -> Call:
    return Call(x, m, Val(v))


def state_of(heap: Heap, stack: Stack) -> Configuration:
    return Configuration(heap={k: (c, dict(f)) for k, (c, f) in heap.items()}, stack=dict(stack))


def to_json(cfg: Configuration) -> dict:
    def jv(v):
        return str(v) if isinstance(v, Loc) else v

    return {
        "result": "EXN" if cfg.thread is EXN else jv(cfg.result) if is_value(cfg.result) else None,
        "heap": {str(k): {"class": c, "fields": {f: jv(v) for f, v in fs.items()}}
                 for k, (c, fs) in sorted(cfg.heap.items())},
        "stack": {x: jv(v) for x, v in cfg.stack.items()},
        "strong_log": [[str(l), f, m] for l, f, m in cfg.strong_log],
        "monitored": [f"{_jd(c.lhs)} {c.rel} {_jd(c.rhs)}" for c in cfg.monitored],
    }


def _jd(d: Expr) -> str:
    v = d.value if isinstance(d, Val) else d
    return "null" if v is None else str(v)
