"""Type checking of expressions, programs and runtime configurations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .syntax import (
    EXN,
    INT,
    NULL_TYPE,
    OBJECT,
    UNIT,
    BinOp,
    Call,
    Cast,
    ClassDecl,
    Expr,
    Invariant,
    Let,
    Loc,
    MethodDecl,
    MethodSig,
    New,
    Program,
    Select,
    Update,
    Val,
    Var,
    free_vars,
    rename_invariant,
)

TypingEnv = dict  # str | Loc -> type name


class AntTypeError(Exception):
    def __init__(self, rule: str, msg: str):
        self.rule = rule
        self.msg = msg
        super().__init__(f"{rule}: {msg}")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    rule: str
    message: str

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.rule}: {self.message}"


@dataclass
class TypingReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def format(self, filename: str = "<input>") -> str:
        return "\n".join(d.format(filename) for d in self.diagnostics)


def is_subtype(p: Program, s: str, t: str) -> bool:
    if s == NULL_TYPE:
        return t != INT
    return p.is_subtype(s, t)


def type_exists(p: Program, t: str) -> bool:
    return t in (INT, UNIT, OBJECT) or p.cls(t) is not None or p.interface(t) is not None


def type_value(env: TypingEnv, v) -> str:
    if v is None:
        return NULL_TYPE
    if isinstance(v, Loc):
        if v not in env:
            raise AntTypeError("tLoc", f"location {v} not in the typing environment")
        return env[v]
    if isinstance(v, int):
        return INT
    raise AntTypeError("tVal", f"not a value: {v!r}")


def _var(env: TypingEnv, x: str) -> str:
    if x not in env:
        raise AntTypeError("tVar", f"unbound variable {x}")
    return env[x]


def _field(p: Program, env: TypingEnv, x: str, f: str, rule: str):
    t = _var(env, x)
    c = p.cls(t)
    if c is None:
        raise AntTypeError(rule, f"{x} has type {t}, which is not a class")
    fd = c.field(f)
    if fd is None:
        raise AntTypeError(rule, f"class {t} has no field {f}")
    return fd


def type_expr(env: TypingEnv, e: Expr, p: Program) -> str:
    if isinstance(e, Val):
        return type_value(env, e.value)
    if isinstance(e, Var):
        return _var(env, e.name)
    if isinstance(e, BinOp):
        for side in (e.left, e.right):
            t = type_expr(env, side, p)
            if t != INT:
                raise AntTypeError("tOp", f"operand of {e.op} has type {t}, expected int")
        return INT
    if isinstance(e, Select):
        return _field(p, env, e.obj, e.field, "tSelect").ty
    if isinstance(e, Update):
        fd = _field(p, env, e.obj, e.field, "tUpdate")
        t = type_expr(env, e.value, p)
        if not is_subtype(p, t, fd.ty):
            raise AntTypeError("tUpdate", f"cannot assign {t} to field {e.field} : {fd.ty}")
        return UNIT
    if isinstance(e, Call):
        t = _var(env, e.obj)
        sig = p.msigs(t).get(e.method)
        if sig is None:
            raise AntTypeError("tCall", f"type {t} has no method {e.method}")
        s = type_expr(env, e.arg, p)
        if not is_subtype(p, s, sig.param_ty):
            raise AntTypeError(
                "tCall", f"argument of {e.method} has type {s}, expected {sig.param_ty}"
            )
        return sig.ret
    if isinstance(e, Let):
        t1 = type_expr(env, e.init, p)
        inner = dict(env)
        inner[e.name] = t1
        return type_expr(inner, e.body, p)
    if isinstance(e, New):
        if p.cls(e.cls) is None:
            raise AntTypeError("tNew", f"unknown class {e.cls}")
        return e.cls
    if isinstance(e, Cast):
        s = type_expr(env, e.expr, p)
        if not type_exists(p, e.ty):
            raise AntTypeError("tCast", f"unknown type {e.ty}")
        if not is_subtype(p, s, e.ty):
            raise AntTypeError("tCast", f"{s} is not a subtype of {e.ty}")
        return e.ty
    raise AntTypeError("tExpr", f"not an expression: {e!r}")


def _check_inv_values(env: TypingEnv, c: Invariant, p: Program, rule: str) -> None:
    for d in (c.lhs, c.rhs):
        if not isinstance(d, (Val, Var, Select)):
            raise AntTypeError(rule, "invariant values must be variables, selections or literals")
        try:
            t = type_expr(env, d, p)
        except AntTypeError as err:
            raise AntTypeError(rule, err.msg) from None
        if t != INT:
            raise AntTypeError(rule, f"invariant operand has type {t}, expected int")


def _selects(c: Invariant) -> list[Select]:
    return [d for d in (c.lhs, c.rhs) if isinstance(d, Select)]


class _Checker:
    def __init__(self, p: Program):
        self.p = p
        self.report = TypingReport()

    def diag(self, key: tuple, rule: str, msg: str) -> None:
        line, col = self.p.positions.get(key, (0, 0))
        self.report.diagnostics.append(Diagnostic(line, col, rule, msg))

    def run(self) -> TypingReport:
        p = self.p
        names = [i.name for i in p.interfaces] + [c.name for c in p.classes]
        for n in sorted({n for n in names if names.count(n) > 1}):
            self.diag(("class", n), "wfProgram", f"duplicate type name {n}")
        for i in p.interfaces:
            self.interface(i)
        for c in p.classes:
            self.cls(c)
        try:
            type_expr({}, p.main, p)
        except AntTypeError as err:
            self.diag(("main",), err.rule, err.msg)
        self.report.diagnostics.sort(key=lambda d: (d.line, d.col, d.rule, d.message))
        return self.report

    def interface(self, i) -> None:
        key = ("interface", i.name)
        for e in i.extends:
            if self.p.interface(e) is None and e != OBJECT:
                self.diag(key, "wfInterfaceE", f"{i.name} extends unknown interface {e}")
        for s in i.sigs:
            for t in (s.param_ty, s.ret):
                if not type_exists(self.p, t):
                    self.diag(key, "wfInterface", f"{s.name} mentions unknown type {t}")

    def cls(self, c: ClassDecl) -> None:
        p = self.p
        key = ("class", c.name)
        if c.implements != OBJECT and p.interface(c.implements) is None:
            self.diag(key, "wfClass", f"{c.name} implements unknown interface {c.implements}")
        fnames = [f.name for f in c.fields]
        for n in sorted({n for n in fnames if fnames.count(n) > 1}):
            self.diag(key, "wfClass", f"duplicate field {n}")
        mnames = [m.name for m in c.methods]
        for n in sorted({n for n in mnames if mnames.count(n) > 1}):
            self.diag(key, "wfClass", f"duplicate method {n}")
        for s in p.msigs(c.implements).values() if c.implements != OBJECT else ():
            m = c.method(s.name)
            if m is None or not _same_sig(m, s):
                self.diag(key, "wfClass", f"{c.name} does not implement {c.implements}.{s.name}")
        env = {"this": c.name}
        for f in c.fields:
            fkey = ("field", c.name, f.name)
            if not type_exists(p, f.ty) or f.ty == UNIT:
                self.diag(fkey, "wfField", f"field {f.name} has invalid type {f.ty}")
            if f.invs and f.ty != INT:
                self.diag(fkey, "wfField", f"invariant on non-int field {f.name}")
            for inv in f.invs:
                try:
                    _check_inv_values(env, inv, p, "wfField")
                except AntTypeError as err:
                    self.diag(fkey, err.rule, err.msg)
                    continue
                for d in (inv.lhs, inv.rhs):
                    if isinstance(d, Var) or (
                        isinstance(d, Select) and (d.obj != "this" or d.field != f.name)
                    ):
                        self.diag(
                            fkey, "wfField",
                            f"invariant of {f.name} may only mention this.{f.name} and literals",
                        )
                        break
        for m in c.methods:
            self.method(c, m)

    def method(self, c: ClassDecl, m: MethodDecl) -> None:
        p = self.p
        key = ("method", c.name, m.name)
        for t in (m.param_ty, m.ret):
            if not type_exists(p, t):
                self.diag(key, "wfMethod", f"{m.name} mentions unknown type {t}")
                return
        env = {"this": c.name, m.param: m.param_ty}
        strong = set(c.strong_fields)
        for pre in m.pre:
            try:
                _check_inv_values(env, pre, p, "wfMethod")
            except AntTypeError as err:
                self.diag(key, err.rule, err.msg)
                continue
            for s in _selects(pre):
                if s.obj != "this" or s.field not in strong:
                    self.diag(
                        key, "wfMethod",
                        f"precondition of {m.name} mentions {s.obj}.{s.field}, "
                        "only strong fields of this are allowed",
                    )
        try:
            t = type_expr(env, m.body, p)
            if not is_subtype(p, t, m.ret):
                self.diag(key, "wfMethod", f"body of {m.name} has type {t}, expected {m.ret}")
        except AntTypeError as err:
            self.diag(key, err.rule, f"in {c.name}.{m.name}: {err.msg}")


def _same_sig(m: MethodDecl, s: MethodSig) -> bool:
    if (m.param_ty, m.ret) != (s.param_ty, s.ret):
        return False
    pre = tuple(rename_invariant(c, {s.param: m.param}) for c in s.pre)
    return pre == m.pre


def check_program(p: Program) -> TypingReport:
    return _Checker(p).run()


# -- configurations ----------------------------------------------------------


def config_env(cfg) -> TypingEnv:
    """The environment a configuration induces: locations by class, stack by value."""
    env: TypingEnv = {loc: obj[0] for loc, obj in cfg.heap.items()}
    for x, v in cfg.stack.items():
        env[x] = type_value(env, v) if not isinstance(v, Loc) or v in env else "?"
    return env


def type_config(env: Optional[TypingEnv], cfg, p: Program) -> Optional[str]:
    """Type a configuration; returns the thread's type (None for EXN)."""
    if env is None:
        env = config_env(cfg)
    # wfHeap
    for loc, (cname, fields) in cfg.heap.items():
        if env.get(loc) != cname:
            raise AntTypeError("wfHeap", f"location {loc} not typed as {cname}")
        c = p.cls(cname)
        if c is None:
            raise AntTypeError("wfHeap", f"unknown class {cname} at {loc}")
        if set(fields) != {f.name for f in c.fields}:
            raise AntTypeError("wfFields", f"field map of {loc} does not match {cname}")
        for f in c.fields:
            t = type_value(env, fields[f.name])
            if not is_subtype(p, t, f.ty):
                raise AntTypeError("wfFields", f"{loc}.{f.name} holds {t}, expected {f.ty}")
    for k in env:
        if isinstance(k, Loc) and k not in cfg.heap:
            raise AntTypeError("wfHeap", f"typed location {k} is not in the heap")
    # stack
    for x, v in cfg.stack.items():
        if x not in env:
            raise AntTypeError("wfCfg", f"stack variable {x} is untyped")
        t = type_value(env, v)
        if not is_subtype(p, t, env[x]):
            raise AntTypeError("wfCfg", f"stack variable {x} holds {t}, expected {env[x]}")
    for loc, f, _mode in cfg.strong_log:
        if loc not in cfg.heap or f not in cfg.heap[loc][1]:
            raise AntTypeError("wfCfg", f"strong log mentions {loc}.{f}, absent from the heap")
    for c in cfg.monitored:
        for d in (c.lhs, c.rhs):
            if not isinstance(d, Val) or free_vars(d):
                raise AntTypeError("wfCfg", "monitored precondition is not closed")
    if cfg.thread is EXN:
        return None
    return type_expr(env, cfg.thread, p)
