"""Abstract syntax of ANT-OOlong programs.

Expressions are immutable dataclasses so they can be hashed, compared and
shared freely between the interpreter, the effect inference and the
pretty printer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

INT = "int"
UNIT = "Unit"
OBJECT = "Object"

OPS = ("+", "-", "*", "/")
RELS = ("=", "!=", "<", "<=", ">", ">=")

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


@dataclass(frozen=True, order=True)
class Loc:
    """A heap location. Only exists at runtime."""

    id: int

    def __str__(self) -> str:
        return f"@{self.id}"


# null is represented by None, integers by int, locations by Loc
Value = Union[None, int, Loc]


def is_value(v: object) -> bool:
    return v is None or isinstance(v, (int, Loc)) and not isinstance(v, bool)


# -- expressions -------------------------------------------------------------


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Val(Expr):
    value: Value


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Select(Expr):
    obj: str
    field: str


@dataclass(frozen=True)
class Update(Expr):
    obj: str
    field: str
    value: Expr


@dataclass(frozen=True)
class Call(Expr):
    obj: str
    method: str
    arg: Expr


@dataclass(frozen=True)
class Let(Expr):
    name: str
    init: Expr
    body: Expr


@dataclass(frozen=True)
class New(Expr):
    cls: str


@dataclass(frozen=True)
class Cast(Expr):
    ty: str
    expr: Expr


NULL = Val(None)


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class Invariant:
    """``lhs rel rhs`` where each side is a Var, a Select or a Val."""

    lhs: Expr
    rel: str
    rhs: Expr


@dataclass(frozen=True)
class FieldDecl:
    name: str
    ty: str
    weak: bool = False
    invs: tuple[Invariant, ...] = ()


@dataclass(frozen=True)
class MethodSig:
    name: str
    param: str
    param_ty: str
    ret: str
    pre: tuple[Invariant, ...] = ()


@dataclass(frozen=True)
class MethodDecl:
    name: str
    param: str
    param_ty: str
    ret: str
    pre: tuple[Invariant, ...]
    body: Expr
    # set when the surface declaration had no parameter and one was padded in
    padded: bool = False

    @property
    def sig(self) -> MethodSig:
        return MethodSig(self.name, self.param, self.param_ty, self.ret, self.pre)


@dataclass(frozen=True)
class InterfaceDecl:
    name: str
    extends: tuple[str, ...] = ()
    sigs: tuple[MethodSig, ...] = ()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    implements: str
    fields: tuple[FieldDecl, ...] = ()
    methods: tuple[MethodDecl, ...] = ()

    def field(self, name: str) -> Optional[FieldDecl]:
        for f in self.fields:
            if f.name == name:
                return f
        return None

    def method(self, name: str) -> Optional[MethodDecl]:
        for m in self.methods:
            if m.name == name:
                return m
        return None

    @property
    def weak_fields(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields if f.weak)

    @property
    def strong_fields(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields if not f.weak)


@dataclass(frozen=True)
class Program:
    interfaces: tuple[InterfaceDecl, ...] = ()
    classes: tuple[ClassDecl, ...] = ()
    main: Expr = NULL
    # source positions keyed by ("class", C), ("field", C, f), ("method", C, m) ...
    positions: dict = field(default_factory=dict, compare=False, repr=False, hash=False)
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "_index",
            {
                "classes": {c.name: c for c in self.classes},
                "interfaces": {i.name: i for i in self.interfaces},
            },
        )

    def cls(self, name: str) -> Optional[ClassDecl]:
        return self._index["classes"].get(name)

    def interface(self, name: str) -> Optional[InterfaceDecl]:
        return self._index["interfaces"].get(name)

    def is_class(self, name: str) -> bool:
        return name in self._index["classes"]

    def fields(self, cname: str) -> tuple[FieldDecl, ...]:
        c = self.cls(cname)
        if c is None:
            raise KeyError(f"unknown class {cname}")
        return c.fields

    def lookup_method(self, cname: str, mname: str) -> MethodDecl:
        c = self.cls(cname)
        m = c.method(mname) if c else None
        if m is None:
            raise KeyError(f"{cname} has no method {mname}")
        return m

    def msigs(self, tname: str) -> dict[str, MethodSig]:
        """Method signatures visible on a class or interface type."""
        c = self.cls(tname)
        if c is not None:
            return {m.name: m.sig for m in c.methods}
        out: dict[str, MethodSig] = {}
        seen: set[str] = set()
        todo = [tname]
        while todo:
            n = todo.pop()
            if n in seen:
                continue
            seen.add(n)
            i = self.interface(n)
            if i is None:
                continue
            for s in i.sigs:
                out.setdefault(s.name, s)
            todo.extend(i.extends)
        return out

    def supertypes(self, tname: str) -> set[str]:
        """Reflexive-transitive supertypes of a type."""
        out = {tname}
        if tname in (INT, UNIT):
            return out
        out.add(OBJECT)
        c = self.cls(tname)
        todo = [c.implements] if c else list(
            self.interface(tname).extends if self.interface(tname) else ()
        )
        while todo:
            n = todo.pop()
            if n in out:
                continue
            out.add(n)
            i = self.interface(n)
            if i is not None:
                todo.extend(i.extends)
        return out

    def is_subtype(self, s: str, t: str) -> bool:
        return t in self.supertypes(s)


# -- helpers -----------------------------------------------------------------


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Val) or isinstance(e, New):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Select):
        return {e.obj}
    if isinstance(e, Update):
        return {e.obj} | free_vars(e.value)
    if isinstance(e, Call):
        return {e.obj} | free_vars(e.arg)
    if isinstance(e, Let):
        return free_vars(e.init) | (free_vars(e.body) - {e.name})
    if isinstance(e, Cast):
        return free_vars(e.expr)
    raise TypeError(f"not an expression: {e!r}")


def bound_vars(e: Expr) -> set[str]:
    if isinstance(e, Let):
        return {e.name} | bound_vars(e.init) | bound_vars(e.body)
    if isinstance(e, BinOp):
        return bound_vars(e.left) | bound_vars(e.right)
    if isinstance(e, Update):
        return bound_vars(e.value)
    if isinstance(e, Call):
        return bound_vars(e.arg)
    if isinstance(e, Cast):
        return bound_vars(e.expr)
    return set()


class Fresh:
    """Generator of names that cannot be written in source programs."""

    def __init__(self, start: int = 0):
        self.n = start

    def __call__(self, base: str) -> str:
        self.n += 1
        return f"{base.split(chr(39))[0]}'{self.n}"


def rename(e: Expr, sub: dict[str, str], fresh: Optional[Fresh] = None) -> Expr:
    """Capture-avoiding renaming of free variables."""
    if not sub:
        return e
    if isinstance(e, (Val, New)):
        return e
    if isinstance(e, Var):
        return Var(sub.get(e.name, e.name))
    if isinstance(e, BinOp):
        return BinOp(e.op, rename(e.left, sub, fresh), rename(e.right, sub, fresh))
    if isinstance(e, Select):
        return Select(sub.get(e.obj, e.obj), e.field)
    if isinstance(e, Update):
        return Update(sub.get(e.obj, e.obj), e.field, rename(e.value, sub, fresh))
    if isinstance(e, Call):
        return Call(sub.get(e.obj, e.obj), e.method, rename(e.arg, sub, fresh))
    if isinstance(e, Cast):
        return Cast(e.ty, rename(e.expr, sub, fresh))
    if isinstance(e, Let):
        init = rename(e.init, sub, fresh)
        inner = {k: v for k, v in sub.items() if k != e.name}
        name = e.name
        if name in inner.values():
            fresh = fresh or Fresh()
            new = fresh(name)
            inner[name] = new
            name = new
        return Let(name, init, rename(e.body, inner, fresh))
    raise TypeError(f"not an expression: {e!r}")


def rename_invariant(c: Invariant, sub: dict[str, str]) -> Invariant:
    return Invariant(rename(c.lhs, sub), c.rel, rename(c.rhs, sub))


def contains_location(e: Expr) -> bool:
    if isinstance(e, Val):
        return isinstance(e.value, Loc)
    if isinstance(e, BinOp):
        return contains_location(e.left) or contains_location(e.right)
    if isinstance(e, Update):
        return contains_location(e.value)
    if isinstance(e, Call):
        return contains_location(e.arg)
    if isinstance(e, Let):
        return contains_location(e.init) or contains_location(e.body)
    if isinstance(e, Cast):
        return contains_location(e.expr)
    return False


def compare(rel: str, a: int, b: int) -> bool:
    if rel == "=":
        return a == b
    if rel == "!=":
        return a != b
    if rel == "<":
        return a < b
    if rel == "<=":
        return a <= b
    if rel == ">":
        return a > b
    if rel == ">=":
        return a >= b
    raise ValueError(f"unknown relation {rel}")


def tdiv(a: int, b: int) -> int:
    """Integer division truncated toward zero."""
    if b == 0:
        raise ZeroDivisionError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def arith(op: str, a: int, b: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return tdiv(a, b)
    raise ValueError(f"unknown operator {op}")


class _Exn:
    """The error thread state. Terminal and absorbing."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "EXN"

    def __reduce__(self):
        return (_Exn, ())


EXN = _Exn()
NULL_TYPE = "Null"  # type of the null literal; below every non-int type
