"""End-to-end checks, one test per acceptance criterion (see README)."""
import time

import pytest

from ant import corpus_path, load_corpus
from ant.analysis import ALWAYS, build_table, static_permissibility
from ant.bounds import BoundedDomain
from ant.crosscheck import crosscheck
from ant.formula import Not, emit_smtlib, sat_bounded, valid_bounded
from ant.interp import run
from ant.oracle import can_anticipate
from ant.parser import parse_expr, parse_program
from ant.simulate import build_state, load_scenario_file, simulate
from ant.symbolic import AliasCase, gen, pair_roles
from ant.table import query
from ant.typecheck import check_program, is_subtype, type_config

CASES = ("this1=this2", "this1|this2")


def counts(table, cls):
    s = table.stats(cls)
    return s.methods, s.non_lp, s.pairs, s.conflicts


def verdicts(table, cls, m2, m1):
    return {r.verdict for r in table.results(cls, m1, m2)}


def anticipates(table, cls, m2, m1):
    return verdicts(table, cls, m2, m1) == {ALWAYS}


def test_criterion_01_account_row():
    p = load_corpus("account")
    t0 = time.perf_counter()
    t = build_table(p, BoundedDomain.for_program(p))
    elapsed = time.perf_counter() - t0
    assert counts(t, "Account") == (6, 3, 21, 5)
    non_lp = {m for (c, m), info in t.methods.items() if not info.lp}
    assert non_lp == {"withdraw", "transfer", "accrueInterest"}
    assert elapsed < 60, elapsed
    # g anticipates everything, d anticipates d and g
    for m1 in ("init", "withdraw", "transfer", "deposit", "accrueInterest", "getBalance"):
        assert anticipates(t, "Account", "getBalance", m1)
    assert anticipates(t, "Account", "deposit", "deposit")
    assert anticipates(t, "Account", "deposit", "getBalance")


def test_criterion_02_counter_row(tables):
    t = tables["counter"]
    s = t.stats("Counter")
    assert (s.methods, s.pairs, s.conflicts) == (3, 6, 0)
    assert {r.verdict for row in t.entries.values() for r in row.values()} == {ALWAYS}


def test_criterion_03_register_row(tables):
    t = tables["register"]
    s = t.stats("Register")
    assert (s.methods, s.pairs, s.conflicts) == (2, 3, 0)
    for m in ("get", "set"):
        assert anticipates(t, "Register", "get", m)
        assert anticipates(t, "Register", m, "get")
    assert anticipates(t, "Register", "set", "set")


def test_criterion_04_auction_row(tables):
    t = tables["auction"]
    assert counts(t, "Auction") == (4, 0, 9, 3)
    assert anticipates(t, "Auction", "bid", "currentBid")
    for m1 in ("bid", "currentBid", "close", "winner"):
        assert anticipates(t, "Auction", "currentBid", m1)
    assert anticipates(t, "Auction", "close", "close")
    assert anticipates(t, "Auction", "bid", "bid")
    # close conflicts with bid and winner on the same auction only
    same = AliasCase.parse("this1=this2")
    assert t.entry("Auction", "bid", "close", same).conflict
    assert not t.entry("Auction", "bid", "close", AliasCase.parse("this1|this2")).conflict


def test_criterion_05_residual_semantics(account_table):
    p = load_corpus("account")
    g = parse_expr("x.getBalance()")
    unexplained = []
    explained = []
    for z in list(range(0, 9)) + [49, 50, 51, 99, 100, 101]:
        state = build_state(p, {"x": ("Account", {"balance": z, "min_cash": 50})})
        for i in range(-200, 201):
            a = parse_expr(f"x.accrueInterest({i})")
            if query(account_table, g, a, state) != (i >= -100):
                (explained if (z * i) % 100 else unexplained).append((z, i))
    if explained:
        print(f"truncated-division divergences: {explained}")
    assert unexplained == []


def test_criterion_06_worked_example():
    p = load_corpus("account")
    for n in (0, 3, 5, 100):
        state = build_state(p, {"x": ("Account", {"balance": n, "min_cash": 50})})
        v = can_anticipate(parse_expr("x.withdraw(5)"), parse_expr("x.deposit(10)"), state, p)
        assert not v.ok, n


def test_criterion_07_oracle_equivalence(programs):
    t0 = time.perf_counter()
    checked = 0
    for name, p in programs.items():
        dom = BoundedDomain.for_program(p, -2, 2)
        rep = crosscheck(p, build_table(p, dom), samples=25, seed=7, dom=dom)
        assert rep.mismatches == [], name
        assert rep.checked >= 25 * rep.cases
        checked += rep.checked
    elapsed = time.perf_counter() - t0
    print(f"oracle equivalence: {checked} instantiations, {elapsed:.1f}s")
    assert elapsed < 300


def _perm(name):
    p = load_corpus("account")
    md = p.cls("Account").method(name)
    g = gen(AliasCase.parse("this1"), p, pair_roles(p, "Account", md, None))
    return static_permissibility(g.config, "Account", md, p, g.rho, 1)


def test_criterion_08_permissibility_formulas():
    dom = BoundedDomain.for_program(load_corpus("account"))
    phi_d, phi_w = _perm("deposit"), _perm("withdraw")
    assert valid_bounded(phi_d.sLP, dom)
    assert not valid_bounded(phi_w.sLP, dom)
    w = sat_bounded(Not(phi_w.sP), dom)
    assert w is not None and w["balance_1"] - w["amount_p1"] < 0
    for f in (phi_d.sLP, phi_w.sLP):
        script = emit_smtlib(f, negate=True)
        assert "(check-sat)" in script and "(forall" in script


def test_smtlib_agrees_with_external_solver():
    # out-of-band half of criterion 8; runs only when z3 is installed
    z3 = pytest.importorskip("z3")
    for name, expect in (("deposit", z3.unsat), ("withdraw", z3.sat)):
        s = z3.Solver()
        s.set("timeout", 20000)
        s.from_string(emit_smtlib(_perm(name).sLP, negate=True))
        assert s.check() == expect


def test_criterion_09_type_system(programs):
    listing = corpus_path("account").read_text()
    assert check_program(parse_program(listing)).ok
    weak_pre = listing.replace("[amount>0] { this.balance += amount }",
                               "[this.balance>0] { this.balance += amount }")
    cross = listing.replace("[this.balance>=0]", "[this.min_cash>=0]")
    for bad in (weak_pre, cross):
        assert bad != listing
        assert not check_program(parse_program(bad)).ok
    for p in programs.values():
        trace = []
        run(p, trace=trace)
        before = type_config(None, trace[0], p)
        assert before is not None
        for cfg in trace[1:]:
            t = type_config(None, cfg, p)
            if t is None:
                break
            assert is_subtype(p, t, before)
            before = t


def test_criterion_10_convergence(account_table):
    three_sites = simulate(load_scenario_file(corpus_path("three_sites.json")), account_table)
    assert len(three_sites.replicas) == 3 and three_sites.converged
    assert any(s.applied for r in three_sites.replicas for s in r.swaps)
    forced = simulate(load_scenario_file(corpus_path("forced_swap.json")), account_table)
    assert not forced.converged


def test_criterion_11_query_performance(account, account_table):
    state = build_state(account, {"x": ("Account", {"balance": 40, "min_cash": 50}),
                                  "y": ("Account", {"balance": 3, "min_cash": 50})})
    pairs = [(parse_expr(a), parse_expr(b)) for a, b in (
        ("x.getBalance()", "x.accrueInterest(-50)"),
        ("x.deposit(3)", "x.withdraw(2)"),
        ("x.withdraw(5)", "y.deposit(10)"),
        ("y.accrueInterest(7)", "x.deposit(1)"),
        ("x.deposit(4)", "x.deposit(9)"),
    )]
    t0 = time.perf_counter()
    for k in range(10_000):
        a, b = pairs[k % len(pairs)]
        query(account_table, a, b, state)
    elapsed = time.perf_counter() - t0
    print(f"10^4 queries: {elapsed:.2f}s")
    assert elapsed < 10
