"""Static commutativity, permissibility and method anticipation.

For an ordered pair (m1, m2), read "m2 can anticipate m1", and an alias
case, four propositions are produced:

    commute   forall W. inv(gen) and all closed preconditions => heaps equal
    pres2     sLP-style permissibility of m2 from the generated heap
    or1       m1 is LP after m2, or m1's (non-)permissibility is preserved
    sfni      no strong field read by one method is written by the other

W are the weak-field symbols of the generated heap. Strong-field symbols
and method parameters stay free and are instantiated at query time.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .bounds import BoundedDomain
from .effects import EffectError
from .formula import (
    FALSE,
    TRUE,
    Cmp,
    Formula,
    FormulaError,
    Implies,
    Not,
    conj,
    disj,
    forall,
    free_syms,
    normalize_term,
    replace_atoms,
    sat_bounded,
    simplify,
    term_syms,
    valid_bounded,
)
from .symbolic import (
    SEP,
    AliasCase,
    EConfiguration,
    Generated,
    SymbolicError,
    enumerate_alias_cases,
    gen,
    pair_roles,
    param_symbol,
    run_method,
)
from .syntax import INT, Loc, MethodDecl, Program, Select

log = logging.getLogger(__name__)

ALWAYS = "Always"
CONDITIONAL = "Conditional"
NEVER = "Never"
CONSTRUCTOR = "init"


# -- invariants and equations --------------------------------------------------


def inv_atoms(cfg: EConfiguration, p: Program) -> list[Cmp]:
    """Field invariants of every object, closed over the symbolic heap."""
    out = []
    for loc in sorted(cfg.heap):
        cname, fields = cfg.heap[loc]
        for fd in p.cls(cname).fields:
            for c in fd.invs:
                out.append(Cmp(_close_inv(c.lhs, fields), c.rel, _close_inv(c.rhs, fields)))
    return out


def _close_inv(d, fields: dict):
    if isinstance(d, Select):
        return fields[d.field]
    return d.value


def weak_inv(cfg: EConfiguration, p: Program) -> list[Cmp]:
    out = []
    for loc in sorted(cfg.heap):
        cname, fields = cfg.heap[loc]
        for fd in p.cls(cname).fields:
            if fd.weak:
                out.extend(Cmp(_close_inv(c.lhs, fields), c.rel, _close_inv(c.rhs, fields))
                           for c in fd.invs)
    return out


def heap_equations(h1: dict, h2: dict) -> list[Formula]:
    """Field-by-field equations between two heaps, normalized, trivial ones dropped."""
    if set(h1) != set(h2) or any(h1[k][0] != h2[k][0] for k in h1):
        raise SymbolicError("heap_equations: the heaps have different locations or classes")
    eqs: list[Formula] = []
    for loc in sorted(h1):
        f1, f2 = h1[loc][1], h2[loc][1]
        for name in f1:
            a, b = f1[name], f2[name]
            if a is None or b is None or isinstance(a, Loc) or isinstance(b, Loc):
                # references are compared syntactically
                if a != b:
                    eqs.append(FALSE)
                continue
            a, b = normalize_term(a), normalize_term(b)
            if a != b:
                eqs.append(Cmp(a, "=", b))
    return eqs


# -- the four executions of a pair ---------------------------------------------


@dataclass
class PairStates:
    generated: Generated
    s1: EConfiguration  # after m1
    s12: EConfiguration  # after m1; m2
    s2: EConfiguration  # after m2
    s21: EConfiguration  # after m2; m1
    c1: list  # m1's closed preconditions from the generated heap
    c2p: list  # m2's, after m1
    c2: list  # m2's, from the generated heap
    c1p: list  # m1's, after m2

    @property
    def s0(self) -> EConfiguration:
        return self.generated.config


def pair_states(case: AliasCase, cname: str, md1: MethodDecl, md2: MethodDecl,
                p: Program, dom: Optional[BoundedDomain] = None) -> PairStates:
    g = gen(case, p, pair_roles(p, cname, md1, md2))
    s0, rho = g.config, g.rho
    s1, c1 = run_method(s0, p, cname, md1, 1, rho, dom)
    s1.strong_log.append(SEP)
    s12, c2p = run_method(s1, p, cname, md2, 2, rho, dom)
    s2, c2 = run_method(s0, p, cname, md2, 2, rho, dom)
    s2.strong_log.append(SEP)
    s21, c1p = run_method(s2, p, cname, md1, 1, rho, dom)
    return PairStates(g, s1, s12, s2, s21, c1, c2p, c2, c1p)


def commute_conditions(case: AliasCase, cname: str, md1: MethodDecl, md2: MethodDecl,
                       p: Program, dom: Optional[BoundedDomain] = None):
    """(Eqs, c~): the heap equations of both orders and the invariant/precondition set."""
    st = pair_states(case, cname, md1, md2, p, dom)
    return _commute(st, p)


def _commute(st: PairStates, p: Program):
    eqs = heap_equations(st.s12.heap, st.s21.heap)
    ctilde = inv_atoms(st.s0, p) + st.c1 + st.c2p + st.c2 + st.c1p
    return eqs, _dedup(ctilde)


def _dedup(atoms):
    out = []
    for a in atoms:
        if a not in out:
            out.append(a)
    return out


# -- permissibility --------------------------------------------------------------


@dataclass
class PermFormulas:
    sP: Formula
    sNP: Formula
    sLP: Formula


def _sp(pre: EConfiguration, c: list, post: EConfiguration, p: Program) -> Formula:
    return Implies(conj(inv_atoms(pre, p) + list(c)), conj(inv_atoms(post, p)))


def _snp(pre: EConfiguration, c: list, post: EConfiguration, p: Program) -> Formula:
    return Implies(conj(inv_atoms(pre, p) + list(c)), Not(conj(inv_atoms(post, p))))


def _closure(f: Formula) -> Formula:
    return forall(sorted(free_syms(f), key=lambda s: s.name), f)


def static_permissibility(esigma: EConfiguration, cname: str, md: MethodDecl, p: Program,
                          rho, i: int = 1, dom: Optional[BoundedDomain] = None) -> PermFormulas:
    post, c = run_method(esigma, p, cname, md, i, rho, dom)
    sp = _sp(esigma, c, post, p)
    return PermFormulas(sp, _snp(esigma, c, post, p), _closure(sp))


def method_lp(cname: str, md: MethodDecl, p: Program, dom: BoundedDomain) -> bool:
    """sLP valid in every alias case of the single call."""
    for case in enumerate_alias_cases(p, cname, md):
        g = gen(case, p, pair_roles(p, cname, md, None))
        perm = static_permissibility(g.config, cname, md, p, g.rho, 1, dom)
        if not valid_bounded(perm.sLP, dom):
            return False
    return True


# -- strong-field non-interference -----------------------------------------------


def _split_log(entries: list) -> tuple[list, list]:
    i = entries.index(SEP)
    return entries[:i], entries[i + 1:]


def sfni_log(entries: list) -> bool:
    left, right = _split_log(entries)
    written = {(l, f) for l, f, m in left if m == "w"}
    return not any(m == "r" and (l, f) in written for l, f, m in right)


def sfni(case: AliasCase, cname: str, md1: MethodDecl, md2: MethodDecl, p: Program) -> bool:
    st = pair_states(case, cname, md1, md2, p)
    return sfni_log(st.s12.strong_log)


# -- method anticipation -----------------------------------------------------------


@dataclass
class AnticipationResult:
    cls: str
    m1: str
    m2: str
    case: AliasCase
    verdict: str = NEVER
    applicable: bool = True
    propositions: dict = field(default_factory=dict)  # name -> Formula
    context: Formula = TRUE  # strong-only hypotheses (K)
    residual: Formula = FALSE  # conjunction of propositions simplified under K
    sfni: bool = False
    commutes: bool = False  # commute proposition valid over the domain
    params: dict = field(default_factory=dict)  # "p1"/"p2" -> symbol name
    symbols: dict = field(default_factory=dict)  # strong symbol name -> SymbolInfo
    diagnostic: str = ""

    @property
    def full(self) -> Formula:
        return conj(self.propositions.values()) if self.sfni else FALSE

    @property
    def conflict(self) -> bool:
        return self.applicable and not (self.commutes and self.sfni)


def _has_weak(atom: Cmp, weak: set) -> bool:
    return bool((term_syms(atom.left) | term_syms(atom.right)) & weak)


def _norm_atom(a: Cmp) -> Cmp:
    return Cmp(normalize_term(a.left), a.rel, normalize_term(a.right))


def applicable(case: AliasCase, md1: MethodDecl, md2: MethodDecl) -> bool:
    """A constructor and another method never run on the same fresh object."""
    if (md1.name == CONSTRUCTOR) != (md2.name == CONSTRUCTOR):
        return not case.same("this1", "this2")
    return True


def method_anticipation(case: AliasCase, cname: str, md1: MethodDecl, md2: MethodDecl,
                        p: Program, dom: BoundedDomain) -> AnticipationResult:
    res = AnticipationResult(cname, md1.name, md2.name, case)
    res.applicable = applicable(case, md1, md2)
    try:
        _anticipate(res, case, cname, md1, md2, p, dom)
    except (SymbolicError, EffectError, FormulaError, ZeroDivisionError) as err:
        res.verdict = NEVER
        res.residual = FALSE
        res.diagnostic = f"{type(err).__name__}: {err}"
        log.warning("%s.(%s, %s) %s: %s", cname, md1.name, md2.name, case, err)
    return res


def _anticipate(res: AnticipationResult, case, cname, md1, md2, p, dom) -> None:
    st = pair_states(case, cname, md1, md2, p, dom)
    g = st.generated
    W = sorted(g.weak_syms, key=lambda s: s.name)
    weak = set(W)
    p1 = param_symbol(md1, 1) if md1.param_ty == INT else None
    p2 = param_symbol(md2, 2) if md2.param_ty == INT else None
    res.params = {k: s.name for k, s in (("p1", p1), ("p2", p2)) if s is not None}
    res.symbols = {n: info for n, info in g.symbols.items() if info.kind == "strong"}

    eqs, ctilde = _commute(st, p)
    commute = forall(W, Implies(conj(ctilde), conj(eqs)))

    sp2 = _sp(st.s0, st.c2, st.s2, p)
    pres2 = disj([forall(W + ([p2] if p2 else []), sp2), forall(W, sp2)])

    sp1 = _sp(st.s0, st.c1, st.s1, p)
    snp1 = _snp(st.s0, st.c1, st.s1, p)
    sp1_post = _sp(st.s2, st.c1p, st.s21, p)
    snp1_post = _snp(st.s2, st.c1p, st.s21, p)
    psi_lp = forall(W + ([p1] if p1 else []), sp1_post)
    psi_pres = forall(W, Implies(conj(inv_atoms(st.s0, p)),
                                 conj([Implies(sp1, sp1_post), Implies(snp1, snp1_post)])))
    or1 = disj([psi_lp, psi_pres])

    res.propositions = {"commute": commute, "pres2": pres2, "or1": or1}
    res.sfni = sfni_log(st.s12.strong_log) and sfni_log(st.s21.strong_log)

    K = [_norm_atom(a) for a in ctilde if not _has_weak(a, weak)]
    K = _dedup([a for a in K if simplify(a) != TRUE])
    res.context = conj(K)
    katoms = set(K)
    reduced = {k: simplify(replace_atoms(f, katoms)) for k, f in res.propositions.items()}
    res.commutes = bool(valid_bounded(reduced["commute"], dom, K))

    if not res.sfni:
        res.verdict, res.residual = NEVER, FALSE
        return
    res.residual = simplify(conj(reduced.values()))
    if all(valid_bounded(f, dom, K) for f in reduced.values()):
        res.verdict = ALWAYS
        res.residual = TRUE
    elif any(sat_bounded(f, dom, K) is None for f in reduced.values()):
        res.verdict = NEVER
        res.residual = FALSE
    else:
        res.verdict = CONDITIONAL


# -- per-method facts ------------------------------------------------------------


def method_access(cname: str, md: MethodDecl, p: Program) -> tuple[set, set, bool]:
    """(weak reads/writes, strong reads/writes, writes anything) of a single call."""
    weak, strong, writes = set(), set(), False
    for case in enumerate_alias_cases(p, cname, md):
        g = gen(case, p, pair_roles(p, cname, md, None))
        post, _pre = run_method(g.config, p, cname, md, 1, g.rho)
        for loc, f, mode in post.access:
            fd = p.cls(post.heap[loc][0]).field(f)
            (weak if fd.weak else strong).add((f, mode))
            writes = writes or mode == "w"
        # strong values read by preconditions count as strong reads
        for c in md.pre:
            for d in (c.lhs, c.rhs):
                if isinstance(d, Select):
                    strong.add((d.field, "r"))
    return weak, strong, writes


def skip_pair(cname: str, md1: MethodDecl, md2: MethodDecl, p: Program) -> bool:
    """Both calls are read-only and read no weak field: nothing to analyze."""
    for md in (md1, md2):
        weak, _strong, writes = method_access(cname, md, p)
        if writes or weak:
            return False
    return True


def build_table(p: Program, dom: Optional[BoundedDomain] = None):
    from .table import AnticipationTable, MethodInfo

    dom = dom or BoundedDomain.for_program(p)
    table = AnticipationTable(program_hash=program_hash(p), bound=(dom.lo, dom.hi),
                              domain_extra=tuple(sorted(dom.extra)))
    for c in p.classes:
        for md in c.methods:
            lp = method_lp(c.name, md, p, dom)
            _weak, strong, _w = method_access(c.name, md, p)
            level = "CoordinationFree" if lp and not strong else "Strong"
            table.methods[(c.name, md.name)] = MethodInfo(c.name, md.name, lp, level)
        names = [m.name for m in c.methods]
        for i, a in enumerate(names):
            for b in names[i:]:
                table.unordered[(c.name, a, b)] = skip_pair(c.name, c.method(a), c.method(b), p)
        for m2 in c.methods:
            for m1 in c.methods:
                for case in enumerate_alias_cases(p, c.name, m1, m2):
                    r = method_anticipation(case, c.name, m1, m2, p, dom)
                    table.add(r)
    return table


def program_hash(p: Program) -> str:
    import hashlib

    from .pretty import pretty_print

    return hashlib.sha256(pretty_print(p).encode()).hexdigest()[:16]
