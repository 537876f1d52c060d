"""Lexer, recursive-descent parser and desugaring for `.ant` sources.

Surface conveniences (statement sequencing, ``+=``/``-=``, zero-argument
methods and calls, compound operands) are removed before the parser hands
back a Program, so downstream code only ever sees the core grammar.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .syntax import (
    INT,
    INT64_MAX,
    INT64_MIN,
    NULL,
    BinOp,
    Call,
    Cast,
    ClassDecl,
    Expr,
    FieldDecl,
    InterfaceDecl,
    Invariant,
    Let,
    MethodDecl,
    MethodSig,
    New,
    Program,
    Select,
    Update,
    Val,
    Var,
)

KEYWORDS = {
    "class", "interface", "implements", "extends", "def",
    "let", "in", "new", "weak", "null",
}
PAD_PARAM = "_p"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+=|-=|<=|>=|!=|==|&&|≥|≤|≠|[-+*/=<>(){}\[\].,:;])
    """,
    re.VERBOSE,
)

_UNICODE_REL = {"≥": ">=", "≤": "<=", "≠": "!=", "==": "="}


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.msg = msg
        self.line = line
        self.col = col
        self.expected = expected
        text = f"{line}:{col}: {msg}"
        if expected:
            text += " (expected " + ", ".join(sorted(set(expected))) + ")"
        super().__init__(text)


@dataclass
class Token:
    kind: str  # int, id, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "id" and s in KEYWORDS:
            kind = "kw"
        if kind == "op":
            s = _UNICODE_REL.get(s, s)
        if kind not in ("ws", "comment"):
            out.append(Token(kind, s, line, col))
        nl = m.group().count("\n")
        if nl:
            line += nl
            col = len(m.group()) - m.group().rfind("\n")
        else:
            col += len(m.group())
        pos = m.end()
    out.append(Token("eof", "<eof>", line, col))
    return out


# -- surface-only nodes ------------------------------------------------------


@dataclass(frozen=True)
class Seq(Expr):
    first: Expr
    rest: Expr


@dataclass(frozen=True)
class Compound(Expr):
    """``x.f += e`` / ``x.f -= e``."""

    obj: str
    field: str
    op: str
    value: Expr


@dataclass(frozen=True)
class NoArgCall(Expr):
    obj: str
    method: str


def is_atom(e: Expr) -> bool:
    """Operands allowed directly under a binary operator."""
    if isinstance(e, (Val, Var, Select)):
        return True
    if isinstance(e, BinOp):
        return is_atom(e.left) and is_atom(e.right)
    return False


def identifiers(e: Expr) -> set[str]:
    out: set[str] = set()

    def walk(x: Expr) -> None:
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, (Select, NoArgCall)):
            out.add(x.obj)
        elif isinstance(x, BinOp):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, (Update, Compound)):
            out.add(x.obj)
            walk(x.value)
        elif isinstance(x, Call):
            out.add(x.obj)
            walk(x.arg)
        elif isinstance(x, Let):
            out.add(x.name)
            walk(x.init)
            walk(x.body)
        elif isinstance(x, Cast):
            walk(x.expr)
        elif isinstance(x, Seq):
            walk(x.first)
            walk(x.rest)

    walk(e)
    return out


class _Names:
    def __init__(self, used: set[str]):
        self.used = set(used)
        self.n = 0

    def __call__(self) -> str:
        while True:
            self.n += 1
            name = f"_s{self.n}"
            if name not in self.used:
                self.used.add(name)
                return name


def desugar(e: Expr, used: Optional[set[str]] = None, names: Optional[_Names] = None) -> Expr:
    """Rewrite surface forms into the core grammar. Idempotent on core terms."""
    if names is None:
        names = _Names(identifiers(e) | (used or set()))
    d = lambda x: desugar(x, names=names)  # noqa: E731
    if isinstance(e, (Val, Var, Select, New)):
        return e
    if isinstance(e, Seq):
        return Let(names(), d(e.first), d(e.rest))
    if isinstance(e, Compound):
        return d(Update(e.obj, e.field, BinOp(e.op, Select(e.obj, e.field), e.value)))
    if isinstance(e, NoArgCall):
        return Call(e.obj, e.method, Val(0))
    if isinstance(e, BinOp):
        left, right = d(e.left), d(e.right)
        binds = []
        if not is_atom(left):
            n = names()
            binds.append((n, left))
            left = Var(n)
        if not is_atom(right):
            n = names()
            binds.append((n, right))
            right = Var(n)
        out: Expr = BinOp(e.op, left, right)
        for n, init in reversed(binds):
            out = Let(n, init, out)
        return out
    if isinstance(e, Update):
        return Update(e.obj, e.field, d(e.value))
    if isinstance(e, Call):
        return Call(e.obj, e.method, d(e.arg))
    if isinstance(e, Let):
        return Let(e.name, d(e.init), d(e.body))
    if isinstance(e, Cast):
        return Cast(e.ty, d(e.expr))
    raise TypeError(f"not an expression: {e!r}")


# -- parser ------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_RELS = ("=", "!=", "<", "<=", ">", ">=")


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.positions: dict = {}

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def error(self, msg: str, *expected: str) -> ParseError:
        return ParseError(msg, self.tok.line, self.tok.col, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"unexpected {self.tok.text!r}", repr(text))
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id":
            raise self.error(f"unexpected {t.text!r}", "identifier")
        self.i += 1
        return t.text

    def where(self) -> tuple[int, int]:
        return (self.tok.line, self.tok.col)

    # declarations
    def program(self) -> Program:
        ifaces: list[InterfaceDecl] = []
        classes: list[ClassDecl] = []
        while self.at("class", "interface"):
            if self.at("class"):
                classes.append(self.class_decl())
            else:
                ifaces.append(self.interface_decl())
        main: Expr = NULL
        if self.tok.kind != "eof":
            self.positions[("main",)] = self.where()
            main = self.seq()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}", "end of input", "';'")
        return Program(tuple(ifaces), tuple(classes), desugar(main), positions=self.positions)

    def type_name(self) -> str:
        return self.ident()

    def interface_decl(self) -> InterfaceDecl:
        pos = self.where()
        self.expect("interface")
        name = self.ident()
        self.positions[("interface", name)] = pos
        ext: list[str] = []
        if self.accept("extends"):
            ext.append(self.ident())
            while self.accept(","):
                ext.append(self.ident())
        self.expect("{")
        sigs = []
        while not self.at("}"):
            sig, _ = self.signature()
            sigs.append(sig)
        self.expect("}")
        return InterfaceDecl(name, tuple(ext), tuple(sigs))

    def signature(self) -> tuple[MethodSig, bool]:
        self.expect("def")
        name = self.ident()
        self.expect("(")
        padded = False
        if self.at(")"):
            param, pty, padded = PAD_PARAM, INT, True
        else:
            param = self.ident()
            self.expect(":")
            pty = self.type_name()
        self.expect(")")
        self.expect(":")
        ret = self.type_name()
        pre = self.invariants() if self.at("[") else ()
        return MethodSig(name, param, pty, ret, pre), padded

    def class_decl(self) -> ClassDecl:
        pos = self.where()
        self.expect("class")
        name = self.ident()
        self.positions[("class", name)] = pos
        self.expect("implements")
        impl = self.ident()
        self.expect("{")
        fields: list[FieldDecl] = []
        methods: list[MethodDecl] = []
        while not self.at("}"):
            if self.at("def"):
                mpos = self.where()
                sig, padded = self.signature()
                self.positions[("method", name, sig.name)] = mpos
                self.expect("{")
                body = self.seq()
                self.expect("}")
                methods.append(
                    MethodDecl(sig.name, sig.param, sig.param_ty, sig.ret, sig.pre,
                               desugar(body, {sig.param}), padded)
                )
            elif self.tok.kind == "id":
                fpos = self.where()
                fname = self.ident()
                self.positions[("field", name, fname)] = fpos
                self.expect(":")
                fty = self.type_name()
                weak = self.accept("weak")
                invs = self.invariants() if self.at("[") else ()
                fields.append(FieldDecl(fname, fty, weak, invs))
            else:
                raise self.error(f"unexpected {self.tok.text!r}", "'def'", "field name", "'}'")
        self.expect("}")
        return ClassDecl(name, impl, tuple(fields), tuple(methods))

    def invariants(self) -> tuple[Invariant, ...]:
        self.expect("[")
        out = []
        if not self.at("]"):
            out.append(self.invariant())
            while self.accept(",") or self.accept("&&"):
                out.append(self.invariant())
        self.expect("]")
        return tuple(out)

    def invariant(self) -> Invariant:
        lhs = self.inv_value()
        if not self.at(*_RELS):
            raise self.error(f"unexpected {self.tok.text!r}", *(repr(r) for r in _RELS))
        rel = self.tok.text
        self.i += 1
        return Invariant(lhs, rel, self.inv_value())

    def inv_value(self) -> Expr:
        t = self.tok
        if t.kind == "int" or self.at("-"):
            return Val(self.int_literal())
        if self.accept("null"):
            return NULL
        if t.kind == "id":
            x = self.ident()
            if self.accept("."):
                return Select(x, self.ident())
            return Var(x)
        raise self.error(f"unexpected {t.text!r}", "integer", "identifier", "'null'")

    def int_literal(self) -> int:
        neg = self.accept("-")
        t = self.tok
        if t.kind != "int":
            raise self.error(f"unexpected {t.text!r}", "integer")
        self.i += 1
        n = -int(t.text) if neg else int(t.text)
        if not INT64_MIN <= n <= INT64_MAX:
            raise ParseError("integer literal out of 64-bit range", t.line, t.col)
        return n

    # expressions
    def seq(self) -> Expr:
        e = self.expr()
        if self.accept(";"):
            if self.at("}", ")") or self.tok.kind == "eof":
                return e
            return Seq(e, self.seq())
        return e

    def expr(self) -> Expr:
        if self.accept("let"):
            name = self.ident()
            self.expect("=")
            init = self.expr()
            self.expect("in")
            return Let(name, init, self.seq())
        if self.tok.kind == "id" and self.peek().text == "." and self.peek(2).kind == "id":
            op = self.peek(3)
            if op.kind == "op" and op.text in ("=", "+=", "-="):
                obj = self.ident()
                self.expect(".")
                fld = self.ident()
                self.i += 1
                value = self.expr()
                if op.text == "=":
                    return Update(obj, fld, value)
                return Compound(obj, fld, op.text[0], value)
        return self.arith(0)

    def arith(self, min_prec: int) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in _PREC and _PREC[self.tok.text] > min_prec:
            op = self.tok.text
            self.i += 1
            right = self.arith(_PREC[op])
            left = BinOp(op, left, right)
        return left

    def unary(self) -> Expr:
        if self.at("-"):
            if self.peek().kind != "int":
                raise self.error("unary minus applies only to integer literals", "integer")
            return Val(self.int_literal())
        return self.primary()

    def _cast_ahead(self) -> bool:
        if not (self.at("(") and self.peek().kind == "id" and self.peek(2).text == ")"):
            return False
        ty = self.peek().text
        nxt = self.peek(3)
        starts = nxt.kind in ("id", "int") or nxt.text in ("null", "new", "(")
        return starts and (ty[0].isupper() or ty == INT)

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            return Val(self.int_literal())
        if self.accept("null"):
            return NULL
        if self.accept("new"):
            return New(self.ident())
        if self._cast_ahead():
            self.expect("(")
            ty = self.ident()
            self.expect(")")
            return Cast(ty, self.primary())
        if self.accept("("):
            e = self.seq()
            self.expect(")")
            return e
        if t.kind == "id":
            x = self.ident()
            if self.accept("."):
                member = self.ident()
                if self.accept("("):
                    if self.accept(")"):
                        return NoArgCall(x, member)
                    arg = self.expr()
                    self.expect(")")
                    return Call(x, member, arg)
                return Select(x, member)
            return Var(x)
        raise self.error(f"unexpected {t.text!r}", "expression")


def parse_program(text: str) -> Program:
    return Parser(text).program()


def parse_expr(text: str) -> Expr:
    p = Parser(text)
    e = p.seq()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}", "end of input")
    return desugar(e)


def parse_invariant(text: str) -> Invariant:
    p = Parser(text)
    c = p.invariant()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}", "end of input")
    return c
