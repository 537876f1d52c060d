"""The anticipation table: storage, JSON persistence and runtime queries."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .analysis import ALWAYS, CONDITIONAL, NEVER, AnticipationResult
from .bounds import BoundedDomain
from .formula import (
    TRUE,
    FormulaError,
    compile_formula,
    emit_smtlib,
    free_names,
    from_json,
    show,
    to_json,
)
from .symbolic import AliasCase, SymbolInfo
from .syntax import Call, Loc, Val, Var

VERSION = 1
STRONG = "Strong"
COORDINATION_FREE = "CoordinationFree"


class TableError(Exception):
    """Malformed table JSON; ``pointer`` is a JSON pointer to the offending value."""

    def __init__(self, msg: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {msg}")


class QueryError(Exception):
    pass


@dataclass
class MethodInfo:
    cls: str
    name: str
    lp: bool
    level: str

    @property
    def sig(self) -> str:
        return f"{self.cls}.{self.name}"


@dataclass
class TableStats:
    methods: int
    non_lp: int
    pairs: int
    conflicts: int


@dataclass
class AnticipationTable:
    version: int = VERSION
    program_hash: str = ""
    bound: tuple = (0, 0)
    domain_extra: tuple = ()
    methods: dict = field(default_factory=dict)  # (cls, name) -> MethodInfo
    # (cls, m2) -> {(m1, alias-case text) -> AnticipationResult}
    entries: dict = field(default_factory=dict)
    # (cls, a, b) with a before b in declaration order -> skipped?
    unordered: dict = field(default_factory=dict)

    def __post_init__(self):
        self._compiled: dict = {}
        self._domains: dict = {}

    @property
    def domain(self) -> BoundedDomain:
        return BoundedDomain(self.bound[0], self.bound[1], frozenset(self.domain_extra))

    def query_domain(self, args: tuple) -> tuple:
        """Quantifier range for a query: the table's domain plus the call arguments."""
        D = self._domains.get(args)
        if D is None:
            if len(self._domains) > 4096:
                self._domains.clear()
            D = self._domains[args] = self.domain.with_points(args).values
        return D

    def add(self, r: AnticipationResult) -> None:
        self.entries.setdefault((r.cls, r.m2), {})[(r.m1, str(r.case))] = r

    def entry(self, cls: str, m1: str, m2: str, case) -> AnticipationResult:
        try:
            return self.entries[(cls, m2)][(m1, str(case))]
        except KeyError:
            raise QueryError(f"no table entry for {cls}: {m2} anticipating {m1} under {case}") from None

    def results(self, cls: str, m1: str, m2: str) -> list[AnticipationResult]:
        return [r for (a, _c), r in self.entries.get((cls, m2), {}).items() if a == m1]

    def classes(self) -> list[str]:
        return sorted({c for c, _ in self.methods})

    def stats(self, cls: str) -> TableStats:
        ms = [m for (c, _), m in self.methods.items() if c == cls]
        pairs = conflicts = 0
        for (c, a, b), skipped in self.unordered.items():
            if c != cls or skipped:
                continue
            pairs += 1
            rs = self.results(c, a, b) + self.results(c, b, a)
            if any(r.conflict for r in rs):
                conflicts += 1
        return TableStats(len(ms), sum(not m.lp for m in ms), pairs, conflicts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnticipationTable):
            return NotImplemented
        return serialize_table(self) == serialize_table(other)


def classify(table: AnticipationTable, cls: str, method: str) -> str:
    """Strong or CoordinationFree, as recorded when the table was built."""
    try:
        return table.methods[(cls, method)].level
    except KeyError:
        raise QueryError(f"unknown method {cls}.{method}") from None


# -- persistence ------------------------------------------------------------------


def _result_json(r: AnticipationResult) -> dict:
    return {
        "m2": f"{r.cls}.{r.m2}",
        "m1": f"{r.cls}.{r.m1}",
        "alias": str(r.case),
        "verdict": r.verdict,
        "applicable": r.applicable,
        "sfni": r.sfni,
        "commutes": r.commutes,
        "params": r.params,
        "symbols": {n: [s.role, list(s.path), s.field] for n, s in sorted(r.symbols.items())},
        "context_ast": to_json(r.context),
        "residual_ast": to_json(r.residual),
        "residual_smt": emit_smtlib(r.residual),
        "residual_text": show(r.residual),
        "propositions_ast": {k: to_json(f) for k, f in r.propositions.items()},
        "diagnostic": r.diagnostic,
    }


def table_json(t: AnticipationTable) -> dict:
    pairs = []
    for (cls, m2) in sorted(t.entries):
        for (m1, alias), r in sorted(t.entries[(cls, m2)].items()):
            pairs.append(_result_json(r))
    return {
        "version": t.version,
        "program_hash": t.program_hash,
        "domain": {"lo": t.bound[0], "hi": t.bound[1], "extra": sorted(t.domain_extra)},
        "methods": [{"sig": m.sig, "lp": m.lp, "level": m.level}
                    for _, m in sorted(t.methods.items())],
        "unordered": [{"class": c, "a": a, "b": b, "skipped": s}
                      for (c, a, b), s in sorted(t.unordered.items())],
        "stats": {c: vars(t.stats(c)) for c in t.classes()},
        "pairs": pairs,
    }


def serialize_table(t: AnticipationTable) -> bytes:
    return json.dumps(table_json(t), indent=1, sort_keys=True).encode()


def _get(obj, key, ty, ptr: str):
    if not isinstance(obj, dict):
        raise TableError("expected an object", ptr)
    if key not in obj:
        raise TableError(f"missing key {key!r}", ptr)
    v = obj[key]
    if ty is int and isinstance(v, bool) or not isinstance(v, ty):
        raise TableError(f"expected {getattr(ty, '__name__', ty)}", f"{ptr}/{key}")
    return v


def _sig(text: str, ptr: str) -> tuple[str, str]:
    cls, dot, name = text.partition(".")
    if not dot or not cls or not name:
        raise TableError(f"bad method signature {text!r}", ptr)
    return cls, name


def _formula(d, ptr: str):
    try:
        return from_json(d)
    except (KeyError, TypeError, ValueError, FormulaError) as err:
        raise TableError(f"bad formula: {err}", ptr) from None


def load_table(data) -> AnticipationTable:
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as err:
            raise TableError(f"not JSON: {err}") from None
    version = _get(data, "version", int, "")
    if version != VERSION:
        raise TableError(f"unsupported table version {version}, expected {VERSION}", "/version")
    dom = _get(data, "domain", dict, "")
    t = AnticipationTable(
        version=version,
        program_hash=_get(data, "program_hash", str, ""),
        bound=(_get(dom, "lo", int, "/domain"), _get(dom, "hi", int, "/domain")),
        domain_extra=tuple(_get(dom, "extra", list, "/domain")),
    )
    for i, m in enumerate(_get(data, "methods", list, "")):
        ptr = f"/methods/{i}"
        cls, name = _sig(_get(m, "sig", str, ptr), f"{ptr}/sig")
        t.methods[(cls, name)] = MethodInfo(cls, name, _get(m, "lp", bool, ptr),
                                            _get(m, "level", str, ptr))
    for i, u in enumerate(_get(data, "unordered", list, "")):
        ptr = f"/unordered/{i}"
        key = (_get(u, "class", str, ptr), _get(u, "a", str, ptr), _get(u, "b", str, ptr))
        t.unordered[key] = _get(u, "skipped", bool, ptr)
    for i, d in enumerate(_get(data, "pairs", list, "")):
        ptr = f"/pairs/{i}"
        cls, m2 = _sig(_get(d, "m2", str, ptr), f"{ptr}/m2")
        _cls, m1 = _sig(_get(d, "m1", str, ptr), f"{ptr}/m1")
        verdict = _get(d, "verdict", str, ptr)
        if verdict not in (ALWAYS, CONDITIONAL, NEVER):
            raise TableError(f"unknown verdict {verdict!r}", f"{ptr}/verdict")
        try:
            case = AliasCase.parse(_get(d, "alias", str, ptr))
        except (KeyError, IndexError):
            raise TableError("bad alias case", f"{ptr}/alias") from None
        symbols = {}
        for n, s in _get(d, "symbols", dict, ptr).items():
            if not (isinstance(s, list) and len(s) == 3):
                raise TableError("expected [role, path, field]", f"{ptr}/symbols/{n}")
            symbols[n] = SymbolInfo(s[0], tuple(s[1]), s[2], "strong")
        props = {k: _formula(f, f"{ptr}/propositions_ast/{k}")
                 for k, f in _get(d, "propositions_ast", dict, ptr).items()}
        t.add(AnticipationResult(
            cls, m1, m2, case,
            verdict=verdict,
            applicable=_get(d, "applicable", bool, ptr),
            propositions=props,
            context=_formula(_get(d, "context_ast", (dict, list, bool), ptr), f"{ptr}/context_ast"),
            residual=_formula(_get(d, "residual_ast", (dict, list, bool), ptr), f"{ptr}/residual_ast"),
            sfni=_get(d, "sfni", bool, ptr),
            commutes=_get(d, "commutes", bool, ptr),
            params=dict(_get(d, "params", dict, ptr)),
            symbols=symbols,
            diagnostic=_get(d, "diagnostic", str, ptr),
        ))
    return t


# -- queries ------------------------------------------------------------------------


@dataclass
class _Compiled:
    names: list
    context: object
    residual: object
    full: object


def _compiled(t: AnticipationTable, r: AnticipationResult) -> _Compiled:
    key = (r.cls, r.m2, r.m1, str(r.case))
    c = t._compiled.get(key)
    if c is None:
        full = r.full
        names = sorted(free_names(r.context) | free_names(r.residual) | free_names(full))
        c = _Compiled(names, compile_formula(r.context, names),
                      compile_formula(r.residual, names), compile_formula(full, names))
        t._compiled[key] = c
    return c


def _value(state, e):
    if isinstance(e, Val):
        return e.value
    if isinstance(e, Var):
        if e.name not in state.stack:
            raise QueryError(f"unbound variable {e.name} in the state snapshot")
        return state.stack[e.name]
    raise QueryError(f"call argument must be a value or a variable, got {e!r}")


def _receiver(state, x: str):
    loc = state.stack.get(x)
    if not isinstance(loc, Loc) or loc not in state.heap:
        raise QueryError(f"receiver {x} does not denote an object in the state snapshot")
    return loc


def realize_case(state, roles: dict) -> AliasCase:
    """The alias case induced by the concrete role locations."""
    blocks: dict = {}
    for role, loc in roles.items():
        blocks.setdefault(loc, []).append(role)
    return AliasCase.parse("|".join("=".join(b) for b in blocks.values()))


def _unanalyzed_aliasing(state, roles: dict) -> bool:
    """Nested objects that alias each other or a role, or are null, are outside the analysis."""
    seen = {}
    for loc in set(roles.values()):
        seen[loc] = "root"
    stack = [(loc, 0) for loc in set(roles.values())]
    while stack:
        loc, depth = stack.pop()
        _cls, fields = state.heap[loc]
        for f, v in sorted(fields.items()):
            if isinstance(v, int):
                continue
            if v is None or v in seen:
                return True
            seen[v] = f
            stack.append((v, depth + 1))
    return False


def _strong_value(state, roles: dict, info: SymbolInfo):
    loc = roles[info.role]
    for f in info.path:
        loc = state.heap[loc][1][f]
    return state.heap[loc][1][info.field]


def _resolve(t: AnticipationTable, call1: Call, call2: Call, state):
    l1, l2 = _receiver(state, call1.obj), _receiver(state, call2.obj)
    cls = state.heap[l1][0]
    if state.heap[l2][0] != cls:
        raise QueryError(f"{call1.obj} and {call2.obj} are objects of different classes")
    a1, a2 = _value(state, call1.arg), _value(state, call2.arg)
    roles = {"this1": l1, "this2": l2}
    if isinstance(a1, Loc):
        roles["other1"] = a1
    if isinstance(a2, Loc):
        roles["other2"] = a2
    r = t.entry(cls, call1.method, call2.method, realize_case(state, roles))
    return r, roles, a1, a2


def query_entry(t: AnticipationTable, call1: Call, call2: Call, state) -> AnticipationResult:
    """The table entry a query for this pair of calls consults."""
    return _resolve(t, call1, call2, state)[0]


def query(t: AnticipationTable, call1: Call, call2: Call, state) -> bool:
    """May call2 be anticipated over call1 in the given state snapshot?"""
    r, roles, a1, a2 = _resolve(t, call1, call2, state)
    if not r.applicable or _unanalyzed_aliasing(state, roles):
        return False
    values = {}
    if "p1" in r.params:
        values[r.params["p1"]] = a1
    if "p2" in r.params:
        values[r.params["p2"]] = a2
    for n, info in r.symbols.items():
        values[n] = _strong_value(state, roles, info)
    c = _compiled(t, r)
    try:
        args = [values[n] for n in c.names]
    except KeyError as err:
        raise QueryError(f"no value for {err.args[0]}") from None
    D = t.query_domain((a1, a2))
    try:
        if c.context(D, *args):
            if r.verdict == ALWAYS:
                return True
            if r.verdict == NEVER:
                return False
            return bool(c.residual(D, *args))
        return bool(c.full(D, *args))
    except ZeroDivisionError:
        return False


def entry_summary(r: AnticipationResult) -> str:
    cond = "" if r.residual == TRUE else f" [{show(r.residual)}]"
    return f"{r.cls}: {r.m2} anticipates {r.m1} under {r.case}: {r.verdict}{cond}"
