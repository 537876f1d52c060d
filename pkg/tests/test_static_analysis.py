import random

import pytest

from ant import CORPUS, load_corpus
from ant.analysis import (
    ALWAYS,
    CONDITIONAL,
    NEVER,
    applicable,
    build_table,
    commute_conditions,
    heap_equations,
    method_access,
    method_anticipation,
    method_lp,
    sfni,
    sfni_log,
    skip_pair,
    static_permissibility,
)
from ant.bounds import BoundedDomain
from ant.crosscheck import sample_values
from ant.formula import FALSE, Cmp, Not, Op, Sym, free_names, sat_bounded, valid_bounded
from ant.oracle import instantiate, locally_permissible, role_call
from ant.symbolic import SEP, AliasCase, enumerate_alias_cases, gen, pair_roles
from ant.syntax import INT, Loc

P = load_corpus("account")
ACC = P.cls("Account")
DOM = BoundedDomain.for_program(P, -2, 2)
SAME, DISTINCT = AliasCase.parse("this1=this2"), AliasCase.parse("this1|this2")


def m(name):
    return ACC.method(name)


# -- heap equations --------------------------------------------------------------


def test_heap_equations_drop_trivial():
    x = Sym("x")
    h = {Loc(1): ("A", {"f": Op("+", x, 1), "g": 3})}
    h2 = {Loc(1): ("A", {"f": Op("+", 1, x), "g": 3})}
    assert heap_equations(h, h2) == []


def test_heap_equations_field_by_field():
    x, y = Sym("x"), Sym("y")
    h = {Loc(1): ("A", {"f": x, "g": y})}
    h2 = {Loc(1): ("A", {"f": y, "g": y})}
    assert heap_equations(h, h2) == [Cmp(x, "=", y)]


def test_heap_equations_references():
    h = {Loc(1): ("A", {"r": Loc(2)}), Loc(2): ("A", {"r": None})}
    h2 = {Loc(1): ("A", {"r": None}), Loc(2): ("A", {"r": None})}
    assert heap_equations(h, h2) == [FALSE]


# -- commutativity ----------------------------------------------------------------


def test_commute_deposits_trivial():
    eqs, ctilde = commute_conditions(SAME, "Account", m("deposit"), m("deposit"), P)
    assert eqs == []
    assert Cmp(Sym("amount_p1", "param"), ">", 0) in ctilde


def test_commute_deposit_accrue_needs_equation():
    eqs, ctilde = commute_conditions(SAME, "Account", m("deposit"), m("accrueInterest"), P)
    assert len(eqs) == 1
    assert free_names(eqs[0]) == {"balance_1", "amount_p1", "interest_p2"}
    assert any("balance_1" in free_names(a) for a in ctilde)


def test_commute_distinct_instances_trivial():
    eqs, _ = commute_conditions(DISTINCT, "Account", m("withdraw"), m("accrueInterest"), P)
    assert eqs == []


# -- permissibility -----------------------------------------------------------------


def _single(name):
    md = m(name)
    g = gen(AliasCase.parse("this1"), P, pair_roles(P, "Account", md, None))
    return static_permissibility(g.config, "Account", md, P, g.rho, 1, DOM)


def test_deposit_permissible():
    assert valid_bounded(_single("deposit").sLP, DOM)


def test_withdraw_not_permissible():
    perm = _single("withdraw")
    assert not valid_bounded(perm.sLP, DOM)
    w = sat_bounded(Not(perm.sP), DOM)
    # the counterexample overdraws
    assert w["amount_p1"] > w["balance_1"] >= 0


def test_slp_is_closed():
    assert free_names(_single("withdraw").sLP) == set()


@pytest.mark.parametrize("name,lp", [
    ("init", True), ("deposit", True), ("getBalance", True),
    ("withdraw", False), ("transfer", False), ("accrueInterest", False),
])
def test_method_lp(name, lp):
    assert method_lp("Account", m(name), P, DOM) is lp


# -- strong-field non-interference ----------------------------------------------------


def test_sfni_log():
    a = Loc(1)
    assert sfni_log([(a, "w", "r"), SEP, (a, "w", "r")])
    assert not sfni_log([(a, "w", "w"), SEP, (a, "w", "r")])
    assert sfni_log([(a, "w", "w"), SEP, (Loc(2), "w", "r")])


def test_sfni_close_winner():
    auction = load_corpus("auction")
    a = auction.cls("Auction")
    assert not sfni(SAME, "Auction", a.method("close"), a.method("winner"), auction)
    assert sfni(DISTINCT, "Auction", a.method("close"), a.method("winner"), auction)
    assert sfni(SAME, "Auction", a.method("winner"), a.method("close"), auction)


# -- method anticipation ------------------------------------------------------------


def test_getbalance_accrue_conditional():
    r = method_anticipation(SAME, "Account", m("getBalance"), m("accrueInterest"), P, DOM)
    assert r.verdict == CONDITIONAL
    assert r.params["p2"] == "interest_p2"
    assert not r.conflict


def test_deposits_distinct_always():
    r = method_anticipation(DISTINCT, "Account", m("deposit"), m("deposit"), P, DOM)
    assert r.verdict == ALWAYS and r.sfni and r.commutes


def test_withdraw_anticipation_never():
    r = method_anticipation(SAME, "Account", m("getBalance"), m("withdraw"), P, DOM)
    assert r.verdict == NEVER


def test_constructor_rule():
    assert not applicable(SAME, m("init"), m("deposit"))
    assert applicable(DISTINCT, m("init"), m("deposit"))
    assert applicable(SAME, m("init"), m("init"))


def test_method_access():
    weak, strong, writes = method_access("Account", m("withdraw"), P)
    assert ("balance", "w") in weak and writes
    weak, strong, writes = method_access("Account", m("getBalance"), P)
    assert weak == {("balance", "r")} and not writes


def test_skip_pair():
    counter = load_corpus("counter")
    c = counter.cls("Counter")
    assert not skip_pair("Counter", c.method("read"), c.method("read"), counter)
    auction = load_corpus("auction")
    a = auction.cls("Auction")
    assert skip_pair("Auction", a.method("winner"), a.method("winner"), auction)


# -- table ---------------------------------------------------------------------------


def test_build_table_account(account_table):
    s = account_table.stats("Account")
    assert (s.methods, s.non_lp, s.pairs, s.conflicts) == (6, 3, 21, 5)


def test_every_case_has_an_entry(tables, programs):
    for name, p in programs.items():
        t = tables[name]
        for c in p.classes:
            for m1 in c.methods:
                for m2 in c.methods:
                    for case in enumerate_alias_cases(p, c.name, m1, m2):
                        assert t.entry(c.name, m1.name, m2.name, case).case == case


def test_empty_program_table():
    from ant.parser import parse_program

    t = build_table(parse_program("null"))
    assert t.classes() == [] and t.entries == {}


@pytest.mark.parametrize("name", CORPUS)
def test_pair_order_coherence(name, programs):
    # commutativity and sfni describe the unordered pair
    p = programs[name]
    dom = BoundedDomain.for_program(p, -2, 2)
    for c in p.classes:
        for m1 in c.methods:
            for m2 in c.methods:
                for case in (SAME, DISTINCT):
                    if m1.param_ty != INT or m2.param_ty != INT:
                        continue
                    a = method_anticipation(case, c.name, m1, m2, p, dom)
                    b = method_anticipation(case, c.name, m2, m1, p, dom)
                    assert a.sfni == b.sfni, (m1.name, m2.name, case)
                    assert a.conflict == b.conflict, (m1.name, m2.name, case)


def _lp_cases():
    for name in CORPUS:
        p = load_corpus(name)
        for c in p.classes:
            for md in c.methods:
                yield name, c.name, md.name


@pytest.mark.parametrize("name,cls,method", list(_lp_cases()))
def test_static_lp_matches_runtime(name, cls, method):
    p = load_corpus(name)
    dom = BoundedDomain.for_program(p, -2, 2)
    md = p.cls(cls).method(method)
    static = method_lp(cls, md, p, dom)
    rng = random.Random(f"{name}.{method}")
    seen_failure = False
    for case in enumerate_alias_cases(p, cls, md):
        g = gen(case, p, pair_roles(p, cls, md, None))
        for _ in range(60):
            sigma = instantiate(g, sample_values(rng, g, p, dom))
            arg = "other1" if md.param_ty != INT else 0
            lp = locally_permissible(sigma, role_call("this1", method, arg), p, dom)
            if static:
                assert lp, sigma
            seen_failure = seen_failure or not lp
    assert static or seen_failure
