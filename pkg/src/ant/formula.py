"""Quantified integer formulas: representation, evaluation, bounded decision, SMT-LIB.

Terms are ints, symbols (``Sym``) or binary operations (``Op``). Division
truncates toward zero everywhere, including in the emitted SMT-LIB, which
defines a ``tdiv`` helper rather than using the solver's euclidean ``div``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .bounds import BoundedDomain
from .syntax import arith, compare

WEAK = "weak"
STRONG = "strong"
PARAM = "param"
ROLES = (WEAK, STRONG, PARAM)

DEFAULT_VAR_CAP = 8


class FormulaError(Exception):
    pass


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class Sym:
    name: str
    role: str = WEAK

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Op:
    op: str
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return show_term(self)


Term = Union[int, Sym, Op]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def show_term(t) -> str:
    if isinstance(t, Op):
        p = _PREC[t.op]
        left = show_term(t.left)
        if isinstance(t.left, Op) and _PREC[t.left.op] < p:
            left = f"({left})"
        right = show_term(t.right)
        if isinstance(t.right, Op) and _PREC[t.right.op] <= p:
            right = f"({right})"
        return f"{left} {t.op} {right}"
    if t is None:
        return "null"
    return str(t)


def term_syms(t, out: Optional[set] = None) -> set:
    if out is None:
        out = set()
    if isinstance(t, Sym):
        out.add(t)
    elif isinstance(t, Op):
        term_syms(t.left, out)
        term_syms(t.right, out)
    return out


def _term_key(t) -> tuple:
    if isinstance(t, bool) or t is None:
        return (3, str(t))
    if isinstance(t, int):
        return (0, t)
    if isinstance(t, Sym):
        return (1, t.name)
    if isinstance(t, Op):
        return (2, show_term(t))
    return (4, str(t))


def _chain(t, op: str, out: list) -> None:
    if isinstance(t, Op) and t.op == op:
        _chain(t.left, op, out)
        _chain(t.right, op, out)
    else:
        out.append(t)


def normalize_term(t):
    """Constant folding, unit elimination, and sorted flattening of + and * chains."""
    if not isinstance(t, Op):
        return t
    left, right = normalize_term(t.left), normalize_term(t.right)
    if t.op in ("+", "*"):
        items: list = []
        _chain(Op(t.op, left, right), t.op, items)
        unit = 0 if t.op == "+" else 1
        const = unit
        rest = []
        for it in items:
            if isinstance(it, int) and not isinstance(it, bool):
                const = arith(t.op, const, it)
            else:
                rest.append(it)
        if t.op == "*" and const == 0 and rest:
            # 0 * t is folded only when t cannot fail; terms here never fail except / 0
            if not any(_may_fail(r) for r in rest):
                return 0
        rest.sort(key=_term_key)
        if const != unit or not rest:
            rest.append(const)
        out = rest[0]
        for r in rest[1:]:
            out = Op(t.op, out, r)
        return out
    if isinstance(left, int) and isinstance(right, int):
        if t.op == "/" and right == 0:
            return Op(t.op, left, right)
        return arith(t.op, left, right)
    if t.op == "-" and right == 0:
        return left
    if t.op == "/" and right == 1:
        return left
    return Op(t.op, left, right)


def _may_fail(t) -> bool:
    if isinstance(t, Op):
        if t.op == "/" and not (isinstance(t.right, int) and t.right != 0):
            return True
        return _may_fail(t.left) or _may_fail(t.right)
    return False


def eval_term(t, a: dict):
    if isinstance(t, Op):
        x, y = eval_term(t.left, a), eval_term(t.right, a)
        if t.op == "/" and y == 0:
            raise ZeroDivisionError("division by zero in formula")
        return arith(t.op, x, y)
    if isinstance(t, Sym):
        if t.name not in a:
            raise FormulaError(f"unbound variable {t.name}")
        return a[t.name]
    return t


def subst_term(t, m: dict):
    if isinstance(t, Sym):
        return m.get(t.name, t)
    if isinstance(t, Op):
        return Op(t.op, subst_term(t.left, m), subst_term(t.right, m))
    return t


# -- formulas ----------------------------------------------------------------


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return conj([self, other])

    def __or__(self, other):
        return disj([self, other])

    def __invert__(self):
        return Not(self)

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Cmp(Formula):
    left: Term
    rel: str
    right: Term


@dataclass(frozen=True)
class And(Formula):
    items: tuple


@dataclass(frozen=True)
class Or(Formula):
    items: tuple


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Sym
    body: Formula


def conj(items: Iterable[Formula]) -> Formula:
    items = tuple(items)
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(items)


def disj(items: Iterable[Formula]) -> Formula:
    items = tuple(items)
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(items)


def forall(vars_: Iterable[Sym], body: Formula) -> Formula:
    for v in sorted(set(vars_), key=lambda s: s.name, reverse=True):
        body = Forall(v, body)
    return body


_NEG_REL = {"=": "!=", "!=": "=", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


def show(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        return f"{show_term(f.left)} {f.rel} {show_term(f.right)}"
    if isinstance(f, And):
        return " && ".join(_paren(i) for i in f.items)
    if isinstance(f, Or):
        return " || ".join(_paren(i) for i in f.items)
    if isinstance(f, Not):
        return f"!{_paren(f.body)}"
    if isinstance(f, Implies):
        return f"{_paren(f.left)} ==> {_paren(f.right)}"
    if isinstance(f, Forall):
        return f"forall {f.var.name}. {_paren(f.body)}"
    raise TypeError(f)


def _paren(f: Formula) -> str:
    s = show(f)
    return s if isinstance(f, (Const, Cmp, Not)) else f"({s})"


def free_syms(f: Formula, bound: frozenset = frozenset()) -> set:
    if isinstance(f, Const):
        return set()
    if isinstance(f, Cmp):
        return {s for s in term_syms(f.left) | term_syms(f.right) if s.name not in bound}
    if isinstance(f, (And, Or)):
        out: set = set()
        for i in f.items:
            out |= free_syms(i, bound)
        return out
    if isinstance(f, Not):
        return free_syms(f.body, bound)
    if isinstance(f, Implies):
        return free_syms(f.left, bound) | free_syms(f.right, bound)
    if isinstance(f, Forall):
        return free_syms(f.body, bound | {f.var.name})
    raise TypeError(f)


def free_names(f: Formula) -> set[str]:
    return {s.name for s in free_syms(f)}


def has_quantifier(f: Formula) -> bool:
    if isinstance(f, Forall):
        return True
    if isinstance(f, (And, Or)):
        return any(has_quantifier(i) for i in f.items)
    if isinstance(f, Not):
        return has_quantifier(f.body)
    if isinstance(f, Implies):
        return has_quantifier(f.left) or has_quantifier(f.right)
    return False


def substitute(f: Formula, m: dict) -> Formula:
    """Replace free symbols by terms (usually ints), keyed by name."""
    if not m:
        return f
    if isinstance(f, Const):
        return f
    if isinstance(f, Cmp):
        return Cmp(subst_term(f.left, m), f.rel, subst_term(f.right, m))
    if isinstance(f, And):
        return And(tuple(substitute(i, m) for i in f.items))
    if isinstance(f, Or):
        return Or(tuple(substitute(i, m) for i in f.items))
    if isinstance(f, Not):
        return Not(substitute(f.body, m))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, m), substitute(f.right, m))
    if isinstance(f, Forall):
        inner = {k: v for k, v in m.items() if k != f.var.name}
        return Forall(f.var, substitute(f.body, inner))
    raise TypeError(f)


def replace_atoms(f: Formula, atoms: set, value: Formula = TRUE) -> Formula:
    """Replace every comparison in ``atoms`` (compared after term normalization)."""
    if not atoms:
        return f
    if isinstance(f, Cmp):
        key = Cmp(normalize_term(f.left), f.rel, normalize_term(f.right))
        return value if key in atoms else f
    if isinstance(f, Const):
        return f
    if isinstance(f, And):
        return And(tuple(replace_atoms(i, atoms, value) for i in f.items))
    if isinstance(f, Or):
        return Or(tuple(replace_atoms(i, atoms, value) for i in f.items))
    if isinstance(f, Not):
        return Not(replace_atoms(f.body, atoms, value))
    if isinstance(f, Implies):
        return Implies(replace_atoms(f.left, atoms, value), replace_atoms(f.right, atoms, value))
    if isinstance(f, Forall):
        inner = {a for a in atoms if f.var not in term_syms(a.left) | term_syms(a.right)}
        return Forall(f.var, replace_atoms(f.body, inner, value))
    raise TypeError(f)


# -- evaluation --------------------------------------------------------------


def eval_formula(f: Formula, a: dict, dom: Optional[BoundedDomain] = None) -> bool:
    """Evaluate under assignment a (name -> int); quantifiers range over dom."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Cmp):
        return compare(f.rel, eval_term(f.left, a), eval_term(f.right, a))
    if isinstance(f, And):
        return all(eval_formula(i, a, dom) for i in f.items)
    if isinstance(f, Or):
        return any(eval_formula(i, a, dom) for i in f.items)
    if isinstance(f, Not):
        return not eval_formula(f.body, a, dom)
    if isinstance(f, Implies):
        return (not eval_formula(f.left, a, dom)) or eval_formula(f.right, a, dom)
    if isinstance(f, Forall):
        dom = dom or BoundedDomain()
        inner = dict(a)
        for v in dom.values:
            inner[f.var.name] = v
            if not eval_formula(f.body, inner, dom):
                return False
        return True
    raise TypeError(f)


def _td(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in formula")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


_PYREL = {"=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


class _Compiler:
    def __init__(self, names: list[str]):
        self.env = {n: f"v{i}" for i, n in enumerate(names)}
        self.n = len(names)

    def term(self, t, env) -> str:
        if isinstance(t, Op):
            a, b = self.term(t.left, env), self.term(t.right, env)
            if t.op == "/":
                return f"_td({a}, {b})"
            return f"({a} {t.op} {b})"
        if isinstance(t, Sym):
            if t.name not in env:
                raise FormulaError(f"unbound variable {t.name}")
            return env[t.name]
        return repr(t)

    def formula(self, f, env) -> str:
        if isinstance(f, Const):
            return "True" if f.value else "False"
        if isinstance(f, Cmp):
            return f"({self.term(f.left, env)} {_PYREL[f.rel]} {self.term(f.right, env)})"
        if isinstance(f, And):
            return "(" + " and ".join(self.formula(i, env) for i in f.items) + ")"
        if isinstance(f, Or):
            return "(" + " or ".join(self.formula(i, env) for i in f.items) + ")"
        if isinstance(f, Not):
            return f"(not {self.formula(f.body, env)})"
        if isinstance(f, Implies):
            return f"((not {self.formula(f.left, env)}) or {self.formula(f.right, env)})"
        if isinstance(f, Forall):
            q = f"q{self.n}"
            self.n += 1
            inner = dict(env)
            inner[f.var.name] = q
            return f"all({self.formula(f.body, inner)} for {q} in D)"
        raise TypeError(f)


def compile_formula(f: Formula, names: list[str]):
    """Compile to a Python function ``fn(D, *values)`` where values follow ``names``."""
    c = _Compiler(list(names))
    body = c.formula(f, c.env)
    args = ", ".join(["D"] + [c.env[n] for n in names])
    src = f"lambda {args}: {body}"
    return eval(src, {"_td": _td, "all": all})  # noqa: S307 - generated from our own AST


# -- simplification ----------------------------------------------------------


def simplify(f: Formula) -> Formula:
    """Equivalence-preserving cleanup: constants, t = t, unit laws, double negation."""
    if isinstance(f, Const):
        return f
    if isinstance(f, Cmp):
        left, right = normalize_term(f.left), normalize_term(f.right)
        if isinstance(left, int) and isinstance(right, int):
            return Const(compare(f.rel, left, right))
        if left == right and not _may_fail(left):
            return Const(f.rel in ("=", "<=", ">="))
        return Cmp(left, f.rel, right)
    if isinstance(f, And):
        out = []
        for i in f.items:
            s = simplify(i)
            if s == FALSE:
                return FALSE
            if s == TRUE:
                continue
            for j in s.items if isinstance(s, And) else (s,):
                if j not in out:
                    out.append(j)
        return conj(out)
    if isinstance(f, Or):
        out = []
        for i in f.items:
            s = simplify(i)
            if s == TRUE:
                return TRUE
            if s == FALSE:
                continue
            for j in s.items if isinstance(s, Or) else (s,):
                if j not in out:
                    out.append(j)
        return disj(out)
    if isinstance(f, Not):
        b = simplify(f.body)
        if isinstance(b, Const):
            return Const(not b.value)
        if isinstance(b, Not):
            return b.body
        return Not(b)
    if isinstance(f, Implies):
        a, b = simplify(f.left), simplify(f.right)
        if a == FALSE or b == TRUE:
            return TRUE
        if a == TRUE:
            return b
        if b == FALSE:
            return simplify(Not(a))
        if a == b:
            return TRUE
        return Implies(a, b)
    if isinstance(f, Forall):
        b = simplify(f.body)
        if isinstance(b, Const):
            return b
        if f.var not in free_syms(b):
            return b
        return Forall(f.var, b)
    raise TypeError(f)


def nnf(f: Formula, neg: bool = False) -> Formula:
    """Negation normal form with implications removed; negated atoms flip relations."""
    if isinstance(f, Const):
        return Const(f.value != neg)
    if isinstance(f, Cmp):
        return Cmp(f.left, _NEG_REL[f.rel], f.right) if neg else f
    if isinstance(f, Not):
        return nnf(f.body, not neg)
    if isinstance(f, And):
        items = tuple(nnf(i, neg) for i in f.items)
        return Or(items) if neg else And(items)
    if isinstance(f, Or):
        items = tuple(nnf(i, neg) for i in f.items)
        return And(items) if neg else Or(items)
    if isinstance(f, Implies):
        if neg:
            return And((nnf(f.left), nnf(f.right, True)))
        return Or((nnf(f.left, True), nnf(f.right)))
    if isinstance(f, Forall):
        inner = Forall(f.var, nnf(f.body))
        return Not(inner) if neg else inner
    raise TypeError(f)


def miniscope(f: Formula) -> Formula:
    """Push universal quantifiers inward as far as they go (on NNF input)."""
    if isinstance(f, (Const, Cmp)):
        return f
    if isinstance(f, And):
        return simplify(And(tuple(miniscope(i) for i in f.items)))
    if isinstance(f, Or):
        return simplify(Or(tuple(miniscope(i) for i in f.items)))
    if isinstance(f, Forall):
        return _push(f.var, miniscope(f.body))
    return f


def _push(x: Sym, body: Formula) -> Formula:
    if x not in free_syms(body):
        return body
    if isinstance(body, And):
        return simplify(And(tuple(_push(x, i) for i in body.items)))
    if isinstance(body, Or):
        with_x = [i for i in body.items if x in free_syms(i)]
        without = [i for i in body.items if x not in free_syms(i)]
        if len(with_x) == 1 and isinstance(with_x[0], And):
            # distribute to split the quantifier over the conjunction
            inner = And(tuple(disj([c]) for c in with_x[0].items))
            if len(inner.items) * max(1, len(without)) <= 64:
                parts = tuple(_push(x, disj([c])) for c in inner.items)
                return simplify(disj(without + [simplify(And(parts))]))
        if not without:
            return Forall(x, body)
        return simplify(disj(without + [_push(x, disj(with_x))]))
    return Forall(x, body)


def prepare(f: Formula) -> Formula:
    return miniscope(simplify(nnf(simplify(f))))


# -- bounded decision --------------------------------------------------------


@dataclass(frozen=True)
class Validity:
    valid: bool
    counterexample: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.valid


def _relevant_context(names: set[str], context: list[Formula]) -> tuple[list[str], list[Formula]]:
    """Context atoms transitively sharing variables with ``names``."""
    names = set(names)
    chosen: list[Formula] = []
    pending = list(context)
    changed = True
    while changed:
        changed = False
        for c in list(pending):
            cn = free_names(c)
            if cn & names:
                chosen.append(c)
                pending.remove(c)
                names |= cn
                changed = True
    return sorted(names), chosen


def _search(f: Formula, dom: BoundedDomain, context: list[Formula], want: bool,
            cap: int) -> Optional[dict]:
    """First assignment (lexicographic over sorted names) satisfying context with f == want."""
    names, ctx = _relevant_context(free_names(f), context)
    if len(names) > cap:
        raise FormulaError(
            f"{len(names)} free variables exceed the enumeration cap of {cap}; "
            "export the formula with emit_smtlib and use an external solver"
        )
    fn = compile_formula(f, names)
    cfn = compile_formula(conj(ctx), names) if ctx else None
    D = dom.values
    for vals in itertools.product(D, repeat=len(names)):
        if cfn is not None and not cfn(D, *vals):
            continue
        if fn(D, *vals) == want:
            return dict(zip(names, vals))
    return None


def _extend(w: dict, names: set[str], context: list[Formula], dom: BoundedDomain,
            cap: int) -> Optional[dict]:
    """Extend w to ``names`` so that every context atom holds, component by component."""
    ctx = [substitute(c, w) for c in context]
    out = dict(w)
    pending = [simplify(c) for c in ctx]
    if any(c == FALSE for c in pending):
        return None
    pending = [c for c in pending if c != TRUE]
    while pending:
        first = pending[0]
        comp_names, comp = _relevant_context(free_names(first), pending)
        pending = [c for c in pending if c not in comp]
        sub = _search(conj(comp), dom, [], True, cap)
        if sub is None:
            return None
        out.update(sub)
    for n in sorted(names):
        out.setdefault(n, dom.values[0])
    return out


def _all_names(f: Formula, ctx: list[Formula]) -> set[str]:
    out = free_names(f)
    for c in ctx:
        out |= free_names(c)
    return out


def sat_bounded(f: Formula, dom: BoundedDomain, context: Iterable[Formula] = (),
                cap: int = DEFAULT_VAR_CAP) -> Optional[dict]:
    """A satisfying assignment of context and f over dom, or None.

    Free variables are existential and quantifiers range over dom. Disjunctions
    are split so each search only enumerates the variables it needs.
    """
    ctx = list(context)
    g = prepare(f)
    parts = g.items if isinstance(g, Or) else (g,)
    for part in parts:
        if part == FALSE:
            continue
        if part == TRUE:
            w: Optional[dict] = {}
        else:
            w = _search(part, dom, ctx, True, cap)
        if w is not None:
            full = _extend(w, _all_names(f, ctx), ctx, dom, cap)
            if full is not None:
                return full
    return None


def valid_bounded(f: Formula, dom: BoundedDomain, context: Iterable[Formula] = (),
                  cap: int = DEFAULT_VAR_CAP) -> Validity:
    """Validity of f over dom for every assignment satisfying context.

    Conjunctions are split; a counterexample is returned when invalid.
    """
    ctx = list(context)
    g = prepare(f)
    parts = g.items if isinstance(g, And) else (g,)
    for part in parts:
        if part == TRUE:
            continue
        if part == FALSE:
            w: Optional[dict] = {}
        else:
            w = _search(part, dom, ctx, False, cap)
        if w is not None:
            full = _extend(w, _all_names(f, ctx), ctx, dom, cap)
            if full is not None:
                return Validity(False, full)
    return Validity(True)


# -- SMT-LIB -----------------------------------------------------------------

_TDIV = (
    "(define-fun tdiv ((a Int) (b Int)) Int\n"
    "  (ite (>= a 0)\n"
    "       (ite (> b 0) (div a b) (- (div a (- b))))\n"
    "       (ite (> b 0) (- (div (- a) b)) (div (- a) (- b)))))"
)


def _smt_term(t) -> str:
    if isinstance(t, Op):
        op = "tdiv" if t.op == "/" else t.op
        return f"({op} {_smt_term(t.left)} {_smt_term(t.right)})"
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, int):
        return str(t) if t >= 0 else f"(- {-t})"
    raise FormulaError(f"cannot emit term {t!r}")


_SMT_REL = {"=": "=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def smt_formula(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        a, b = _smt_term(f.left), _smt_term(f.right)
        if f.rel == "!=":
            return f"(not (= {a} {b}))"
        return f"({_SMT_REL[f.rel]} {a} {b})"
    if isinstance(f, And):
        return "(and " + " ".join(smt_formula(i) for i in f.items) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(smt_formula(i) for i in f.items) + ")"
    if isinstance(f, Not):
        return f"(not {smt_formula(f.body)})"
    if isinstance(f, Implies):
        return f"(=> {smt_formula(f.left)} {smt_formula(f.right)})"
    if isinstance(f, Forall):
        return f"(forall (({f.var.name} Int)) {smt_formula(f.body)})"
    raise TypeError(f)


def emit_smtlib(f: Formula, negate: bool = False) -> str:
    """SMT-LIB 2 script checking satisfiability of f (of its negation if negate).

    For a validity query pass negate=True: the formula is valid iff the
    solver answers unsat.
    """
    logic = "NIA" if has_quantifier(f) else "QF_NIA"
    lines = [f"(set-logic {logic})", _TDIV]
    for s in sorted(free_syms(f), key=lambda s: s.name):
        lines.append(f"(declare-const {s.name} Int) ; {s.role}")
    body = smt_formula(f)
    lines.append(f"(assert (not {body}))" if negate else f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# -- serialization -----------------------------------------------------------


def term_to_json(t):
    if isinstance(t, Op):
        return {"op": t.op, "l": term_to_json(t.left), "r": term_to_json(t.right)}
    if isinstance(t, Sym):
        return {"sym": t.name, "role": t.role}
    return t


def term_from_json(d):
    if isinstance(d, dict):
        if "op" in d:
            return Op(d["op"], term_from_json(d["l"]), term_from_json(d["r"]))
        return Sym(d["sym"], d["role"])
    if isinstance(d, int) and not isinstance(d, bool):
        return d
    raise FormulaError(f"malformed term {d!r}")


def to_json(f: Formula):
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Cmp):
        return {"cmp": f.rel, "l": term_to_json(f.left), "r": term_to_json(f.right)}
    if isinstance(f, And):
        return {"and": [to_json(i) for i in f.items]}
    if isinstance(f, Or):
        return {"or": [to_json(i) for i in f.items]}
    if isinstance(f, Not):
        return {"not": to_json(f.body)}
    if isinstance(f, Implies):
        return {"implies": [to_json(f.left), to_json(f.right)]}
    if isinstance(f, Forall):
        return {"forall": term_to_json(f.var), "body": to_json(f.body)}
    raise TypeError(f)


def from_json(d) -> Formula:
    if isinstance(d, bool):
        return Const(d)
    if not isinstance(d, dict):
        raise FormulaError(f"malformed formula {d!r}")
    if "cmp" in d:
        return Cmp(term_from_json(d["l"]), d["cmp"], term_from_json(d["r"]))
    if "and" in d:
        return And(tuple(from_json(i) for i in d["and"]))
    if "or" in d:
        return Or(tuple(from_json(i) for i in d["or"]))
    if "not" in d:
        return Not(from_json(d["not"]))
    if "implies" in d:
        a, b = d["implies"]
        return Implies(from_json(a), from_json(b))
    if "forall" in d:
        return Forall(term_from_json(d["forall"]), from_json(d["body"]))
    raise FormulaError(f"malformed formula {d!r}")
