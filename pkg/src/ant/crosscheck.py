"""Agreement between the static table and the runtime oracle on sampled states."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .analysis import pair_states
from .bounds import BoundedDomain
from .oracle import can_anticipate, field_ok, instantiate, role_call
from .symbolic import enumerate_alias_cases
from .syntax import INT, Program
from .table import AnticipationTable, query


@dataclass
class Mismatch:
    cls: str
    m1: str
    m2: str
    case: str
    values: dict
    static: bool
    runtime: bool
    failed: Optional[str]


@dataclass
class CrosscheckReport:
    checked: int = 0
    cases: int = 0
    mismatches: list = field(default_factory=list)
    agree_true: int = 0

    @property
    def ok(self) -> bool:
        return not self.mismatches


def sample_values(rng: random.Random, generated, p: Program, dom: BoundedDomain) -> dict:
    """Field values from the domain that satisfy each field's own invariants."""
    out = {}
    for name, info in sorted(generated.symbols.items()):
        loc = generated.rho[info.role]
        for f in info.path:
            loc = generated.config.heap[loc][1][f]
        cname = generated.config.heap[loc][0]
        good = [v for v in dom if field_ok(p, cname, info.field, {info.field: v})] or list(dom)
        out[name] = rng.choice(good)
    return out


def crosscheck(p: Program, table: AnticipationTable, samples: int = 25, seed: int = 0,
               dom: Optional[BoundedDomain] = None, classes: Optional[list] = None) -> CrosscheckReport:
    dom = dom or table.domain
    rng = random.Random(seed)
    rep = CrosscheckReport()
    for c in p.classes:
        if classes is not None and c.name not in classes:
            continue
        for m2 in c.methods:
            for m1 in c.methods:
                for case in enumerate_alias_cases(p, c.name, m1, m2):
                    r = table.entry(c.name, m1.name, m2.name, case)
                    if not r.applicable:
                        continue
                    rep.cases += 1
                    g = pair_states(case, c.name, m1, m2, p).generated
                    for _ in range(samples):
                        vals = sample_values(rng, g, p, dom)
                        sigma = instantiate(g, vals)
                        a1 = "other1" if m1.param_ty != INT else rng.choice(dom.values)
                        a2 = "other2" if m2.param_ty != INT else rng.choice(dom.values)
                        mc1, mc2 = role_call("this1", m1.name, a1), role_call("this2", m2.name, a2)
                        st = query(table, mc1, mc2, sigma)
                        rt = can_anticipate(mc1, mc2, sigma, p, dom)
                        rep.checked += 1
                        if st != rt.ok:
                            vals = dict(vals, arg1=a1, arg2=a2)
                            rep.mismatches.append(Mismatch(c.name, m1.name, m2.name, str(case),
                                                           vals, st, rt.ok, rt.failed))
                        elif st:
                            rep.agree_true += 1
    return rep
