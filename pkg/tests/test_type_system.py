
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ant import CORPUS, corpus_path
from ant.interp import Configuration, run
from ant.parser import parse_expr, parse_program
from ant.syntax import Cast, Invariant, Loc, Program, Val
from ant.typecheck import AntTypeError, check_program, is_subtype, type_config, type_expr

LISTING = corpus_path("account").read_text()


def rules(text):
    return {d.rule for d in check_program(parse_program(text)).diagnostics}


def test_listing_accepts(account):
    report = check_program(account)
    assert report.ok, report.format()


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_accepts(name, programs):
    assert check_program(programs[name]).ok


def test_weak_field_in_precondition_rejected():
    bad = LISTING.replace("def deposit(amount : int) : Unit [amount>0]",
                          "def deposit(amount : int) : Unit [this.balance>0]")
    assert bad != LISTING
    assert "wfMethod" in rules(bad)


def test_cross_field_invariant_rejected():
    bad = LISTING.replace("balance  : int weak [this.balance>=0]",
                          "balance  : int weak [this.min_cash>=0]")
    assert bad != LISTING
    assert "wfField" in rules(bad)


def test_missing_interface_method_rejected():
    text = """
    interface Shape { def area(x : int) : int }
    class Sq implements Shape { side : int }
    null"""
    assert "wfClass" in rules(text)


def test_ill_typed_main_reported():
    text = LISTING + "\n; acc2.deposit(acc1)"
    report = check_program(parse_program(text))
    assert not report.ok
    line = report.format("account.ant").splitlines()[0]
    assert line.startswith("account.ant:") and "tCall" in line


def test_type_expr_examples(account):
    env = {"this": "Account", "amount": "int"}
    assert type_expr(env, parse_expr("this.balance + amount"), account) == "int"
    assert type_expr({"x": "Account"}, parse_expr("x.deposit(5)"), account) == "Unit"
    assert type_expr({}, Cast("Account", Val(None)), account) == "Account"
    with pytest.raises(AntTypeError) as exc:
        type_expr({}, Cast("int", Val(None)), account)
    assert exc.value.rule == "tCast"
    assert not is_subtype(account, "null", "int")


def test_unbound_variable(account):
    with pytest.raises(AntTypeError) as exc:
        type_expr({}, parse_expr("y + 1"), account)
    assert exc.value.rule == "tVar"


def test_type_config_initial(account):
    assert type_config(None, Configuration(thread=account.main), account) == "int"


def test_type_config_bad_strong_log(account):
    loc = Loc(1)
    cfg = Configuration(heap={loc: ("Account", {"balance": 0, "min_cash": 50})},
                        stack={"x": loc}, strong_log=[(loc, "nope", "r")])
    with pytest.raises(AntTypeError) as exc:
        type_config(None, cfg, account)
    assert exc.value.rule == "wfCfg"


def test_type_config_open_monitored(account):
    from ant.syntax import Var

    cfg = Configuration(monitored=[Invariant(Var("y"), ">", Val(0))])
    with pytest.raises(AntTypeError) as exc:
        type_config(None, cfg, account)
    assert exc.value.rule == "wfCfg"


@pytest.mark.parametrize("name", CORPUS)
def test_subject_reduction(name, programs):
    p = programs[name]
    trace = []
    run(p, trace=trace)
    assert len(trace) > 1
    before = type_config(None, trace[0], p)
    for cfg in trace[1:]:
        t = type_config(None, cfg, p)
        if t is None:  # EXN
            break
        assert is_subtype(p, t, before)
        before = t


@settings(max_examples=30, deadline=None)
@given(st.randoms(use_true_random=False))
def test_check_independent_of_class_order(rnd):
    p = parse_program(LISTING)
    classes = list(p.classes)
    rnd.shuffle(classes)
    q = Program(p.interfaces, tuple(classes), p.main)
    assert check_program(q) == check_program(p)
    assert check_program(q) == check_program(q)
