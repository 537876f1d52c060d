"""Deterministic replica simulator for anticipation decisions.

Every replica starts from the same heap and receives the same calls in a
delivery order. A replica may try to anticipate a call over its predecessor
(an adjacent swap); the swap is applied only if the table allows it in the
state the two calls would run in, unless the scenario forces it. Calls that are not
guarded or would break the state invariant are rejected and leave the state
unchanged, which is how a replica protects its invariants locally.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .interp import Configuration, InterpError, init_value, to_json
from .oracle import execute, state_invariant
from .parser import ParseError, parse_expr, parse_program
from .syntax import Call, Loc, Program, Var
from .table import AnticipationTable, QueryError, query


class ScenarioError(Exception):
    pass


def build_state(p: Program, objects: dict) -> Configuration:
    """A state with one stack variable per named object.

    ``objects`` maps names to (class, fields); unlisted fields take their
    initial values and object-typed fields name other objects or are None.
    """
    locs = {name: Loc(i + 1) for i, name in enumerate(objects)}
    heap = {}
    for name, (cname, fields) in objects.items():
        c = p.cls(cname)
        if c is None:
            raise ScenarioError(f"object {name}: unknown class {cname}")
        vals = {f.name: init_value(f.ty) for f in p.fields(cname)}
        for f, v in fields.items():
            if f not in vals:
                raise ScenarioError(f"object {name}: class {cname} has no field {f}")
            if isinstance(v, str):
                if v not in locs:
                    raise ScenarioError(f"object {name}: field {f} names unknown object {v}")
                v = locs[v]
            elif not (v is None or isinstance(v, int) and not isinstance(v, bool)):
                raise ScenarioError(f"object {name}: field {f} must be an int, null or an object name")
            vals[f] = v
        heap[locs[name]] = (cname, vals)
    return Configuration(heap=heap, stack=dict(locs))


def objects_from_json(data: dict) -> dict:
    try:
        return {name: (spec["class"], dict(spec.get("fields", {}))) for name, spec in data.items()}
    except (KeyError, TypeError, AttributeError):
        raise ScenarioError("objects must map names to {\"class\": ..., \"fields\": {...}}") from None


@dataclass
class SwapRequest:
    at: int  # anticipate order[at + 1] over order[at]
    force: bool = False


@dataclass
class ReplicaSpec:
    name: str
    order: list  # call ids
    swaps: list = field(default_factory=list)  # SwapRequest


@dataclass
class ReplicaScenario:
    program: Program
    objects: dict  # name -> (class, {field: int | object name | None})
    calls: dict  # id -> Call
    replicas: list  # ReplicaSpec

    def initial_state(self) -> Configuration:
        return build_state(self.program, self.objects)


@dataclass
class SwapRecord:
    at: int
    m1: str
    m2: str
    permitted: bool
    applied: bool


@dataclass
class ReplicaResult:
    name: str
    order: list = field(default_factory=list)
    swaps: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    state: Optional[Configuration] = None
    error: str = ""


@dataclass
class ReplicaReport:
    replicas: list
    converged: bool

    def to_json(self) -> dict:
        return {
            "converged": self.converged,
            "replicas": [
                {
                    "name": r.name,
                    "order": r.order,
                    "swaps": [vars(s) for s in r.swaps],
                    "rejected": r.rejected,
                    "error": r.error,
                    "heap": to_json(r.state)["heap"] if r.state is not None else None,
                }
                for r in self.replicas
            ],
        }


def _apply(call: Call, state: Configuration, p: Program) -> Optional[Configuration]:
    """The post-state of an accepted call, or None when the replica rejects it."""
    o = execute(call, state, p)
    if not o.ok or not o.guarded:
        return None
    if state_invariant(state, p) and not state_invariant(o.post, p):
        return None
    post = o.post
    # drop the evaluator's temporaries so replicas compare on named state only
    post.stack = dict(state.stack)
    post.strong_log = []
    post.monitored = []
    return post


def canonical(state: Configuration) -> tuple:
    """Heap shape reachable from the named objects, with locations renamed by visit order."""
    ids: dict = {}
    order = []
    todo = [state.stack[x] for x in sorted(state.stack) if isinstance(state.stack[x], Loc)]
    while todo:
        loc = todo.pop(0)
        if loc in ids or loc not in state.heap:
            continue
        ids[loc] = len(ids)
        order.append(loc)
        for _f, v in sorted(state.heap[loc][1].items()):
            if isinstance(v, Loc):
                todo.append(v)

    def val(v):
        return ("loc", ids.get(v, -1)) if isinstance(v, Loc) else v

    named = tuple((x, val(state.stack[x])) for x in sorted(state.stack))
    objs = tuple((state.heap[l][0], tuple(sorted((f, val(v)) for f, v in state.heap[l][1].items())))
                 for l in order)
    return named, objs


def _run(order: list, sc: ReplicaScenario) -> tuple[Configuration, list]:
    state = sc.initial_state()
    rejected = []
    for cid in order:
        post = _apply(sc.calls[cid], state, sc.program)
        if post is None:
            rejected.append(cid)
        else:
            state = post
    return state, rejected


def run_replica(spec: ReplicaSpec, sc: ReplicaScenario, table: AnticipationTable) -> ReplicaResult:
    """Apply the requested swaps in order, each judged in the state the pair would
    run in, then execute the resulting delivery order."""
    res = ReplicaResult(spec.name)
    order = list(spec.order)
    try:
        for req in spec.swaps:
            if not 0 <= req.at < len(order) - 1:
                raise ScenarioError(f"swap at {req.at} has no successor")
            state, _ = _run(order[:req.at], sc)
            c1, c2 = order[req.at], order[req.at + 1]
            try:
                ok = query(table, sc.calls[c1], sc.calls[c2], state)
            except QueryError as err:
                raise ScenarioError(str(err)) from None
            applied = ok or req.force
            res.swaps.append(SwapRecord(req.at, c1, c2, ok, applied))
            if applied:
                order[req.at], order[req.at + 1] = c2, c1
        res.state, res.rejected = _run(order, sc)
    except (ScenarioError, InterpError) as err:
        res.error = str(err)
    res.order = order
    return res


def simulate(sc: ReplicaScenario, table: AnticipationTable) -> ReplicaReport:
    results = [run_replica(r, sc, table) for r in sc.replicas]
    ok = [r for r in results if not r.error]
    forms = {canonical(r.state) for r in ok}
    return ReplicaReport(results, converged=len(ok) == len(results) and len(forms) <= 1)


# -- scenario files ------------------------------------------------------------------


def resolve_program(ref: str, base: Optional[Path] = None) -> Path:
    if ref.startswith("corpus:"):
        from . import corpus_path

        return corpus_path(ref.split(":", 1)[1])
    path = Path(ref)
    if not path.is_absolute() and base is not None:
        path = base / path
    return path


def load_scenario(data: dict, base: Optional[Path] = None,
                  program: Optional[Program] = None) -> ReplicaScenario:
    try:
        if program is None:
            program = parse_program(resolve_program(data["program"], base).read_text())
        objects = objects_from_json(data["objects"])
        calls = {}
        for cid, text in data["calls"].items():
            e = parse_expr(text)
            if not isinstance(e, Call) or e.obj not in objects:
                raise ScenarioError(f"call {cid}: expected obj.method(arg) on a declared object")
            calls[cid] = e
        replicas = []
        ids = sorted(calls)
        for r in data["replicas"]:
            if sorted(r["order"]) != ids:
                raise ScenarioError(f"replica {r['name']} must receive every call exactly once")
            swaps = [SwapRequest(int(s["at"]), bool(s.get("force", False))) for s in r.get("swaps", [])]
            replicas.append(ReplicaSpec(r["name"], list(r["order"]), swaps))
    except KeyError as err:
        raise ScenarioError(f"scenario is missing {err}") from None
    except (OSError, ParseError) as err:
        raise ScenarioError(f"cannot load the scenario program: {err}") from None
    for cid, c in calls.items():
        if isinstance(c.arg, Var) and c.arg.name not in objects:
            raise ScenarioError(f"call {cid}: unknown object {c.arg.name}")
    return ReplicaScenario(program, objects, calls, replicas)


def load_scenario_file(path) -> ReplicaScenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ScenarioError(f"cannot read {path}: {err}") from None
    return load_scenario(data, path.parent)
