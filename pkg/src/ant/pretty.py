"""Pretty printer producing source that reparses to the same AST."""
from __future__ import annotations

from .syntax import (
    BinOp,
    Call,
    Cast,
    ClassDecl,
    Expr,
    FieldDecl,
    InterfaceDecl,
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
)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def show_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, Loc):
        return str(v)
    return str(v)


def show_expr(e: Expr) -> str:
    if isinstance(e, Val):
        return show_value(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Select):
        return f"{e.obj}.{e.field}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = show_expr(e.left)
        if isinstance(e.left, BinOp) and _PREC[e.left.op] < p:
            left = f"({left})"
        right = show_expr(e.right)
        if isinstance(e.right, BinOp) and _PREC[e.right.op] <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, Update):
        return f"{e.obj}.{e.field} = {show_expr(e.value)}"
    if isinstance(e, Call):
        return f"{e.obj}.{e.method}({show_expr(e.arg)})"
    if isinstance(e, Let):
        init = show_expr(e.init)
        if isinstance(e.init, Let):
            init = f"({init})"
        return f"let {e.name} = {init} in {show_expr(e.body)}"
    if isinstance(e, New):
        return f"new {e.cls}"
    if isinstance(e, Cast):
        inner = show_expr(e.expr)
        if not isinstance(e.expr, (Val, Var, Select, Call, New)) or (
            isinstance(e.expr, Val) and isinstance(e.expr.value, int) and e.expr.value < 0
        ):
            inner = f"({inner})"
        return f"({e.ty}) {inner}"
    raise TypeError(f"not an expression: {e!r}")


def show_invariant(c: Invariant) -> str:
    return f"{show_expr(c.lhs)}{c.rel}{show_expr(c.rhs)}"


def _invs(cs) -> str:
    return " [" + ", ".join(show_invariant(c) for c in cs) + "]" if cs else ""


def _sig(s: MethodSig, padded: bool = False) -> str:
    param = "" if padded else f"{s.param} : {s.param_ty}"
    return f"def {s.name}({param}) : {s.ret}{_invs(s.pre)}"


def show_field(f: FieldDecl) -> str:
    return f"{f.name} : {f.ty}{' weak' if f.weak else ''}{_invs(f.invs)}"


def show_method(m: MethodDecl) -> str:
    return f"{_sig(m.sig, m.padded)} {{ {show_expr(m.body)} }}"


def show_class(c: ClassDecl) -> str:
    lines = [f"class {c.name} implements {c.implements} {{"]
    lines += ["  " + show_field(f) for f in c.fields]
    lines += ["  " + show_method(m) for m in c.methods]
    lines.append("}")
    return "\n".join(lines)


def show_interface(i: InterfaceDecl) -> str:
    ext = f" extends {', '.join(i.extends)}" if i.extends else ""
    lines = [f"interface {i.name}{ext} {{"]
    lines += ["  " + _sig(s) for s in i.sigs]
    lines.append("}")
    return "\n".join(lines)


def pretty_print(p: Program) -> str:
    parts = [show_interface(i) for i in p.interfaces]
    parts += [show_class(c) for c in p.classes]
    if not (isinstance(p.main, Val) and p.main.value is None) or not parts:
        parts.append(show_expr(p.main))
    return "\n\n".join(parts) + "\n"
