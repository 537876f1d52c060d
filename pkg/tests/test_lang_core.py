import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ant import CORPUS, corpus_path
from ant.parser import ParseError, desugar, parse_expr, parse_program
from ant.pretty import pretty_print, show_expr
from ant.syntax import BinOp, Call, Let, New, Select, Update, Val, Var, contains_location


def test_listing_account_shape(account):
    acc = account.cls("Account")
    assert [f.name for f in acc.fields] == ["balance", "min_cash"]
    bal, mc = acc.fields
    assert bal.weak and not mc.weak
    assert [m.name for m in acc.methods] == [
        "init", "withdraw", "transfer", "deposit", "accrueInterest", "getBalance"]
    assert str(bal.invs[0].rhs.value) == "0" and bal.invs[0].rel == ">="
    assert mc.invs[0].rhs.value == 50


def test_empty_program():
    p = parse_program("")
    assert p.interfaces == () and p.classes == ()
    assert p.main == Val(None)


@pytest.mark.parametrize("name", CORPUS)
def test_round_trip(name, programs):
    p = programs[name]
    text = pretty_print(p)
    assert parse_program(text) == p
    assert pretty_print(parse_program(text)) == text


def test_pretty_shows_weak_field(account):
    assert "balance : int weak [this.balance>=0]" in pretty_print(account)


def test_compound_assignment():
    assert parse_expr("this.balance += amount") == Update(
        "this", "balance", BinOp("+", Select("this", "balance"), Var("amount")))


def test_sequence_becomes_let():
    e = parse_expr("this.withdraw(a); w.deposit(a)")
    assert isinstance(e, Let)
    assert e.init == Call("this", "withdraw", Var("a"))
    assert e.body == Call("w", "deposit", Var("a"))
    assert e.name not in ("a", "w", "this")


def test_zero_arg_padding(account):
    gb = account.cls("Account").method("getBalance")
    assert gb.param_ty == "int"
    assert parse_expr("x.getBalance()") == Call("x", "getBalance", Val(0))


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_program("class A implements Object {\n  f : int weak [this.f >= ]\n}")
    assert exc.value.line == 2
    assert exc.value.expected


def test_corpus_has_no_locations(programs):
    for p in programs.values():
        assert not contains_location(p.main)
        for c in p.classes:
            for m in c.methods:
                assert not contains_location(m.body)


def test_location_literal_rejected():
    with pytest.raises(ParseError):
        parse_expr("@1")


def test_corpus_files_are_packaged():
    for name in CORPUS:
        assert corpus_path(name).read_text().strip()


# -- properties over generated expressions ----------------------------------------

names = st.sampled_from(["x", "y", "z", "acc"])
ints = st.integers(min_value=-1000, max_value=1000)
atoms = st.one_of(ints.map(Val), st.just(Val(None)), names.map(Var))
svs = st.recursive(
    atoms.filter(lambda v: v != Val(None)),
    lambda inner: st.builds(BinOp, st.sampled_from(["+", "-", "*", "/"]), inner, inner),
    max_leaves=5,
)


def exprs():
    base = st.one_of(
        svs,
        atoms,
        st.builds(Select, names, st.sampled_from(["f", "g"])),
        st.builds(New, st.sampled_from(["A", "B"])),
        st.builds(Call, names, st.sampled_from(["m", "n"]), svs),
    )
    return st.recursive(
        base,
        lambda inner: st.one_of(
            st.builds(Let, names, inner, inner),
            st.builds(Update, names, st.sampled_from(["f", "g"]), inner),
        ),
        max_leaves=6,
    )


@settings(max_examples=200, deadline=None)
@given(exprs())
def test_show_parse_round_trip(e):
    assert parse_expr(show_expr(e)) == desugar(e)


@settings(max_examples=200, deadline=None)
@given(exprs())
def test_desugar_idempotent(e):
    once = desugar(e)
    assert desugar(once) == once
    assert not contains_location(once)
