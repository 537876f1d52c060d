"""Runtime permissibility and anticipation, decided by running the interpreter.

This is the concrete counterpart of the static analysis. Weak fields are
quantified ("irrespective of the actual values of the weak fields") by
enumerating the weak slots the calls touch over the bounded domain; strong
fields and arguments keep their concrete values.

can_anticipate(mc1, mc2, sigma) asks whether mc2 may run before mc1:

    commute   for all N: I and both orders guarded => equal heaps
    pres2     mc2 is permissible for all N (or m2 is LP for all N)
    or1       m1 is LP after mc2, or m1's (non-)permissibility is preserved
    sfni      neither call reads a strong field the other one writes
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .bounds import BoundedDomain
from .interp import Configuration, InterpError, closure, evaluate
from .syntax import EXN, INT, Call, Invariant, Loc, Program, Select, Val, Var, compare


# -- invariants -------------------------------------------------------------------


def satisfies(c: Invariant, sigma: Optional[Configuration] = None) -> bool:
    """c holds; an open c is first closed over sigma's heap and stack."""
    if sigma is not None:
        c = closure(sigma.heap, sigma.stack, [c])[0]
    a, b = c.lhs, c.rhs
    if not (isinstance(a, Val) and isinstance(b, Val)):
        raise InterpError("satisfies: invariant is not closed")
    if not isinstance(a.value, int) or not isinstance(b.value, int):
        return False
    return compare(c.rel, a.value, b.value)


def _inv_value(d, fields: dict):
    if isinstance(d, Select):
        return fields[d.field]
    return d.value


def object_invariant(p: Program, cname: str, fields: dict) -> bool:
    for fd in p.cls(cname).fields:
        for c in fd.invs:
            a, b = _inv_value(c.lhs, fields), _inv_value(c.rhs, fields)
            if not (isinstance(a, int) and isinstance(b, int) and compare(c.rel, a, b)):
                return False
    return True


def state_invariant(sigma: Configuration, p: Program) -> bool:
    """I(sigma): every field invariant of every object holds."""
    return all(object_invariant(p, c, f) for c, f in sigma.heap.values())


# -- running calls ----------------------------------------------------------------


@dataclass
class Outcome:
    post: Optional[Configuration]  # None when the call raised EXN
    guarded: bool  # every monitored (closed) precondition held
    log: list = field(default_factory=list)  # strong log of this call alone

    @property
    def ok(self) -> bool:
        return self.post is not None


def execute(mc: Call, sigma: Configuration, p: Program, access: Optional[set] = None) -> Outcome:
    cfg = sigma.copy()
    cfg.strong_log = []
    cfg.monitored = []
    out = evaluate(p, cfg, mc, access=access)
    if out.thread is EXN:
        return Outcome(None, False)
    guarded = all(satisfies(c) for c in out.monitored)
    return Outcome(out, guarded, list(out.strong_log))


def is_guarded(mc: Call, sigma: Configuration, p: Program) -> bool:
    return execute(mc, sigma, p).guarded


def _perm(o: Outcome, pre_inv: bool, p: Program) -> bool:
    # guarded and I(sigma) => I(sigma'); EXN counts as a violation
    if not (o.guarded and pre_inv):
        return True
    return o.ok and state_invariant(o.post, p)


def _nperm(o: Outcome, pre_inv: bool, p: Program) -> bool:
    if not (o.guarded and pre_inv):
        return True
    return not o.ok or not state_invariant(o.post, p)


def permissible(sigma: Configuration, mc: Call, p: Program) -> bool:
    """P: a guarded call from an invariant-satisfying state keeps the invariant."""
    return _perm(execute(mc, sigma, p), state_invariant(sigma, p), p)


def not_permissible(sigma: Configuration, mc: Call, p: Program) -> bool:
    """NP: a guarded call from an invariant-satisfying state breaks the invariant."""
    return _nperm(execute(mc, sigma, p), state_invariant(sigma, p), p)


def _with_arg(mc: Call, a) -> Call:
    return Call(mc.obj, mc.method, Val(a))


def _int_param(sigma: Configuration, mc: Call, p: Program) -> bool:
    loc = sigma.stack[mc.obj]
    md = p.cls(sigma.heap[loc][0]).method(mc.method)
    return md.param_ty == INT


def locally_permissible(sigma: Configuration, mc: Call, p: Program,
                        dom: Optional[BoundedDomain] = None) -> bool:
    """LP of mc's method on mc's receiver: every guarded call with an argument from
    the domain (int parameter) or any heap object of the parameter's class is permissible."""
    dom = dom or BoundedDomain.for_program(p)
    if _int_param(sigma, mc, p):
        return all(permissible(sigma, _with_arg(mc, a), p) for a in dom)
    md = p.lookup_method(sigma.heap[sigma.stack[mc.obj]][0], mc.method)
    tmp = "lp'arg"
    for loc in sorted(sigma.heap):
        if not p.is_subtype(sigma.heap[loc][0], md.param_ty):
            continue
        s = sigma.copy()
        s.stack[tmp] = loc
        if not permissible(s, Call(mc.obj, mc.method, Var(tmp)), p):
            return False
    return True


def state_commute(sigma: Configuration, mc1: Call, mc2: Call, p: Program) -> bool:
    """Both orders from sigma reach the same heap (EXN in either order: no)."""
    a = execute(mc1, sigma, p)
    b = execute(mc2, a.post, p) if a.ok else None
    c = execute(mc2, sigma, p)
    d = execute(mc1, c.post, p) if c.ok else None
    if not (b and d and b.ok and d.ok):
        return False
    return b.post.heap == d.post.heap


# -- weak-field quantification -------------------------------------------------------


def weak_slots(sigma: Configuration, p: Program) -> list[tuple[Loc, str]]:
    out = []
    for loc in sorted(sigma.heap):
        cname, fields = sigma.heap[loc]
        for fd in p.cls(cname).fields:
            if fd.weak and fd.ty == INT:
                out.append((loc, fd.name))
    return out


def wifg(sigma: Configuration, values, p: Optional[Program] = None) -> Configuration:
    """sigma with weak integer slots overwritten.

    ``values`` maps (location, field) slots to integers, or is a tuple N with
    one entry per slot in weak_slots order (which needs the program).
    """
    if not isinstance(values, dict):
        if p is None:
            raise ValueError("wifg with a tuple needs the program")
        slots = weak_slots(sigma, p)
        if len(slots) != len(values):
            raise ValueError(f"wifg expects {len(slots)} values, got {len(values)}")
        values = dict(zip(slots, values))
    out = sigma.copy()
    for (loc, f), v in values.items():
        out.heap[loc][1][f] = v
    return out


def field_ok(p: Program, cname: str, f: str, fields: dict) -> bool:
    """The invariants declared on field f hold for an object with these fields."""
    for c in p.cls(cname).field(f).invs:
        a, b = _inv_value(c.lhs, fields), _inv_value(c.rhs, fields)
        if not (isinstance(a, int) and isinstance(b, int) and compare(c.rel, a, b)):
            return False
    return True


def _slot_ok(p: Program, sigma: Configuration, loc: Loc, f: str, v) -> bool:
    cname, fields = sigma.heap[loc]
    return field_ok(p, cname, f, {**fields, f: v})


def _quantified(sigma: Configuration, calls: list, p: Program, dom: BoundedDomain):
    """(slots to enumerate, base state).

    Weak slots no call touches only matter through their own invariants, which
    appear identically before and after; such a slot is pinned to a value
    satisfying its invariants (quantifying over it would give the same answer).
    """
    touched: set = set()
    for mc, state in calls:
        execute(mc, state, p, access=touched)
    base = sigma.copy()
    slots = []
    for loc, f in weak_slots(sigma, p):
        if (loc, f) in touched:
            slots.append((loc, f))
            continue
        if _slot_ok(p, base, loc, f, base.heap[loc][1][f]):
            continue
        good = next((v for v in dom if _slot_ok(p, base, loc, f, v)), None)
        if good is None:
            slots.append((loc, f))
        else:
            base.heap[loc][1][f] = good
    return slots, base


# -- anticipation -------------------------------------------------------------------


@dataclass
class OracleVerdict:
    ok: bool
    failed: Optional[str] = None  # commute | pres2 | or1 | sfni
    witness: Optional[dict] = None  # weak-slot values refuting the failed step

    def __bool__(self) -> bool:
        return self.ok


def _sfni(left: list, right: list) -> bool:
    written = {(l, f) for l, f, m in left if m == "w"}
    return not any(m == "r" and (l, f) in written for l, f, m in right)


def _show_slots(values: dict) -> dict:
    return {f"{loc}.{f}": v for (loc, f), v in values.items()}


def can_anticipate(mc1: Call, mc2: Call, sigma: Configuration, p: Program,
                   dom: Optional[BoundedDomain] = None) -> OracleVerdict:
    """May mc2 be executed before mc1 from sigma?"""
    dom = dom or BoundedDomain.for_program(p)
    # the calls' own arguments join the domain, as program literals do
    dom = dom.with_points(mc.arg.value for mc in (mc1, mc2) if isinstance(mc.arg, Val))
    D = dom.values
    a1 = _int_param(sigma, mc1, p)
    v2 = mc2.arg.value if isinstance(mc2.arg, Val) else None
    m2_in_dom = _int_param(sigma, mc2, p) and v2 in dom
    args1 = [_with_arg(mc1, a) for a in D] if a1 else [mc1]

    # the access pattern and the strong logs do not depend on weak values
    r1 = execute(mc1, sigma, p)
    r2 = execute(mc2, sigma, p)
    probe = [(mc1, sigma), (mc2, sigma)]
    if r1.ok:
        probe.append((mc2, r1.post))
    if r2.ok:
        probe.extend((mc, r2.post) for mc in args1)
    slots, base = _quantified(sigma, probe, p, dom)
    if r1.ok and r2.ok:
        r12, r21 = execute(mc2, r1.post, p), execute(mc1, r2.post, p)
        if r12.ok and r21.ok and not (_sfni(r1.log, r12.log) and _sfni(r2.log, r21.log)):
            return OracleVerdict(False, "sfni")

    # States breaking a slot's own invariant make every step below vacuous
    # (each is guarded by I), so only invariant-respecting values are visited.
    valid = [[v for v in D if _slot_ok(p, base, loc, f, v)] for loc, f in slots]
    pres2_all = True
    pres2_witness = None
    pres_ok = True
    pres_witness = None
    for vals in itertools.product(*valid):
        N = dict(zip(slots, vals))
        s0 = wifg(base, N)
        if not state_invariant(s0, p):
            continue
        r1 = execute(mc1, s0, p)
        r12 = execute(mc2, r1.post, p) if r1.ok else Outcome(None, False)
        r2 = execute(mc2, s0, p)
        r21 = execute(mc1, r2.post, p) if r2.ok else Outcome(None, False)
        if r1.guarded and r12.guarded and r2.guarded and r21.guarded:
            if not (r12.ok and r21.ok and r12.post.heap == r21.post.heap):
                return OracleVerdict(False, "commute", _show_slots(N))
        if pres2_all and not _perm(r2, True, p):
            pres2_all = False
            pres2_witness = _show_slots(N)
            if m2_in_dom:
                # the LP disjunct includes this very call
                return OracleVerdict(False, "pres2", pres2_witness)
        if pres_ok:
            i2 = r2.ok and state_invariant(r2.post, p)
            p_pre, p_post = _perm(r1, True, p), _perm(r21, i2, p)
            np_pre, np_post = _nperm(r1, True, p), _nperm(r21, i2, p)
            if (p_pre and not p_post) or (np_pre and not np_post):
                pres_ok = False
                pres_witness = _show_slots(N)

    if not pres2_all:
        # LP disjunct for m2: every argument in the domain, for every N
        if not _int_param(sigma, mc2, p):
            return OracleVerdict(False, "pres2", pres2_witness)
        for vals in itertools.product(*valid):
            s0 = wifg(base, dict(zip(slots, vals)))
            if not state_invariant(s0, p):
                continue
            for a in D:
                if not _perm(execute(_with_arg(mc2, a), s0, p), True, p):
                    return OracleVerdict(False, "pres2", pres2_witness)

    if not pres_ok:
        # LP disjunct for m1 after mc2, over every weak valuation
        for vals in itertools.product(D, repeat=len(slots)):
            s0 = wifg(base, dict(zip(slots, vals)))
            r2 = execute(mc2, s0, p)
            if not r2.ok:
                return OracleVerdict(False, "or1", pres_witness)
            i2 = state_invariant(r2.post, p)
            if not i2:
                continue
            for mc in args1:
                if not _perm(execute(mc, r2.post, p), True, p):
                    return OracleVerdict(False, "or1", pres_witness)
    return OracleVerdict(True)


# -- concrete states from generated shapes ----------------------------------------------


def instantiate(generated, values: dict) -> Configuration:
    """A concrete state with the shape of a generated symbolic heap.

    Symbols take their values from ``values``; every role location is bound
    on the stack under its role name and every other object under ``o<id>``,
    so the whole heap is reachable.
    """
    from .formula import Sym, eval_term

    heap = {}
    for loc, (cname, fields) in generated.config.heap.items():
        out = {}
        for f, v in fields.items():
            if isinstance(v, Sym):
                out[f] = values[v.name]
            elif isinstance(v, (Loc, type(None))) or isinstance(v, int):
                out[f] = v
            else:
                out[f] = eval_term(v, values)
        heap[loc] = (cname, out)
    stack = {}
    for role, loc in generated.rho.roles.items():
        stack[role] = loc
    for loc in sorted(heap):
        if loc not in stack.values():
            stack[f"o{loc.id}"] = loc
    return Configuration(heap=heap, stack=stack)


def role_call(role_this: str, method: str, arg) -> Call:
    """x.m(v) where an object argument is passed through its role variable."""
    if isinstance(arg, str):
        return Call(role_this, method, Var(arg))
    return Call(role_this, method, Val(arg))
