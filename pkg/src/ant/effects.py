"""Effect inference: a flat instruction list summarizing a method body.

Every effect instruction talks to a single return-value buffer. Calls are
inlined, let-binders and callee parameters get globally fresh names, and
callee preconditions travel with the VbindC binder that introduces the
callee's parameter.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .syntax import (
    BinOp,
    Call,
    Cast,
    Expr,
    FieldDecl,
    Invariant,
    Let,
    MethodDecl,
    New,
    Program,
    Select,
    Update,
    Val,
    Var,
    rename,
    rename_invariant,
)
from .typecheck import type_expr

DEFAULT_DEPTH = 16


class EffectError(Exception):
    pass


@dataclass(frozen=True)
class Vfield:
    obj: str
    field: str


@dataclass(frozen=True)
class VbindL:
    var: str


@dataclass(frozen=True)
class VbindC:
    var: str
    pre: tuple[Invariant, ...]


EffectVar = Union[Vfield, VbindL, VbindC]


@dataclass(frozen=True)
class EretVal:
    value: object


@dataclass(frozen=True)
class EretVar:
    var: str


@dataclass(frozen=True)
class EretField:
    obj: str
    field: str


@dataclass(frozen=True)
class Eop:
    op: str
    operand: Expr  # a symbolic value: Val, Var or BinOp over them


@dataclass(frozen=True)
class Evar:
    target: EffectVar


@dataclass(frozen=True)
class Enew:
    cls: str
    fields: tuple[FieldDecl, ...]


EffectExpr = Union[EretVal, EretVar, EretField, Eop, Evar, Enew]


@dataclass(frozen=True)
class Effect:
    preconds: tuple[Invariant, ...]
    items: tuple


class _Fresh:
    def __init__(self):
        self.n = 0

    def __call__(self, base: str) -> str:
        self.n += 1
        return f"{base.split(chr(39))[0]}'{self.n}"


_FRESH = _Fresh()


def _is_sv(e: Expr) -> bool:
    if isinstance(e, (Val, Var)):
        return True
    if isinstance(e, BinOp):
        return _is_sv(e.left) and _is_sv(e.right)
    return False


def infer_effect(env: dict, e: Expr, p: Program, fresh: Optional[_Fresh] = None,
                 depth: int = DEFAULT_DEPTH) -> list:
    """The effect list of e under the typing environment env."""
    fresh = fresh or _FRESH
    return _infer(dict(env), e, p, fresh, depth)


def _infer(env: dict, e: Expr, p: Program, fresh: _Fresh, depth: int) -> list:
    if isinstance(e, Val):
        return [EretVal(e.value)]
    if isinstance(e, Var):
        return [EretVar(e.name)]
    if isinstance(e, Select):
        return [EretField(e.obj, e.field)]
    if isinstance(e, BinOp):
        if _is_sv(e.right):
            return _infer(env, e.left, p, fresh, depth) + [Eop(e.op, e.right)]
        # a right operand reading the heap is evaluated into a fresh binder first
        t = fresh("_r")
        env[t] = "int"
        return (
            _infer(env, e.right, p, fresh, depth)
            + [Evar(VbindL(t))]
            + _infer(env, e.left, p, fresh, depth)
            + [Eop(e.op, Var(t))]
        )
    if isinstance(e, Update):
        return _infer(env, e.value, p, fresh, depth) + [Evar(Vfield(e.obj, e.field))]
    if isinstance(e, Let):
        x = fresh(e.name)
        head = _infer(env, e.init, p, fresh, depth)
        env[x] = type_expr(env, e.init, p)
        return head + [Evar(VbindL(x))] + _infer(env, rename(e.body, {e.name: x}), p, fresh, depth)
    if isinstance(e, Call):
        if depth <= 0:
            raise EffectError(f"call depth budget exhausted at {e.obj}.{e.method} (recursion?)")
        cname = env.get(e.obj)
        c = p.cls(cname) if cname else None
        md = c.method(e.method) if c else None
        if md is None:
            raise EffectError(f"cannot resolve callee {e.obj}.{e.method} (receiver type {cname})")
        y = fresh(md.param)
        sub = {"this": e.obj, md.param: y}
        pre = tuple(rename_invariant(c_, sub) for c_ in md.pre)
        head = _infer(env, e.arg, p, fresh, depth)
        env[y] = md.param_ty
        body = rename(md.body, sub)
        return head + [Evar(VbindC(y, pre))] + _infer(env, body, p, fresh, depth - 1)
    if isinstance(e, New):
        c = p.cls(e.cls)
        if c is None:
            raise EffectError(f"unknown class {e.cls}")
        return [Enew(c.name, c.fields)]
    if isinstance(e, Cast):
        return _infer(env, e.expr, p, fresh, depth)
    raise EffectError(f"not an expression: {e!r}")


def infer_method_effect(md: MethodDecl, p: Program, cname: Optional[str] = None,
                        fresh: Optional[_Fresh] = None) -> Effect:
    if cname is None:
        cname = next(c.name for c in p.classes if md in c.methods)
    env = {"this": cname, md.param: md.param_ty}
    return Effect(md.pre, tuple(infer_effect(env, md.body, p, fresh)))


# -- JSON --------------------------------------------------------------------


def _sv_json(e: Expr):
    from .pretty import show_expr

    return show_expr(e)


def _inv_json(c: Invariant) -> str:
    from .pretty import show_invariant

    return show_invariant(c)


def effect_item_json(h) -> dict:
    if isinstance(h, EretVal):
        return {"tag": "EretVal", "value": h.value if not hasattr(h.value, "id") else str(h.value)}
    if isinstance(h, EretVar):
        return {"tag": "EretVar", "var": h.var}
    if isinstance(h, EretField):
        return {"tag": "EretField", "obj": h.obj, "field": h.field}
    if isinstance(h, Eop):
        return {"tag": "Eop", "op": h.op, "operand": _sv_json(h.operand)}
    if isinstance(h, Enew):
        return {"tag": "Enew", "class": h.cls, "fields": [f.name for f in h.fields]}
    if isinstance(h, Evar):
        t = h.target
        if isinstance(t, Vfield):
            return {"tag": "Evar", "kind": "Vfield", "obj": t.obj, "field": t.field}
        if isinstance(t, VbindL):
            return {"tag": "Evar", "kind": "VbindL", "var": t.var}
        return {"tag": "Evar", "kind": "VbindC", "var": t.var,
                "pre": [_inv_json(c) for c in t.pre]}
    raise TypeError(h)


def effect_json(eff: Effect) -> dict:
    return {"preconds": [_inv_json(c) for c in eff.preconds],
            "effects": [effect_item_json(h) for h in eff.items]}
