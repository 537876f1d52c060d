import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ant import load_corpus
from ant.effects import (
    Effect,
    EffectError,
    Enew,
    Eop,
    EretField,
    EretVal,
    EretVar,
    Evar,
    VbindC,
    VbindL,
    Vfield,
    effect_json,
    infer_effect,
    infer_method_effect,
)
from ant.formula import Op, eval_term
from ant.interp import update
from ant.parser import parse_expr, parse_program
from ant.simulate import build_state
from ant.symbolic import EConfiguration, update_s
from ant.syntax import Call, Val, Var

P = load_corpus("account")
ACC = P.cls("Account")


def effect(m):
    return infer_method_effect(ACC.method(m), P, "Account")


def test_deposit_effect():
    assert effect("deposit").items == (
        EretField("this", "balance"), Eop("+", Var("amount")), Evar(Vfield("this", "balance")))


def test_value_effect():
    assert infer_effect({}, parse_expr("5"), P) == [EretVal(5)]


def test_init_effect():
    e = effect("init")
    assert [str(c.rhs) for c in e.preconds] == [str(ACC.method("init").pre[0].rhs)]
    assert e.items == (EretVar("amount"), Evar(Vfield("this", "balance")))


def test_get_balance_effect():
    assert effect("getBalance") == Effect((), (EretField("this", "balance"),))


def test_accrue_interest_effect():
    items = effect("accrueInterest").items
    assert items[:3] == (EretField("this", "balance"), Eop("*", Var("interest")), Eop("/", Val(100)))
    bind = items[3]
    assert isinstance(bind, Evar) and isinstance(bind.target, VbindL)
    x = bind.target.var
    assert items[4:] == (EretField("this", "balance"), Eop("+", Var(x)),
                         Evar(Vfield("this", "balance")))


def test_transfer_effect_has_nested_preconditions():
    items = effect("transfer").items
    binds = [i.target for i in items if isinstance(i, Evar) and isinstance(i.target, VbindC)]
    assert len(binds) == 2
    for b in binds:
        (c,) = b.pre
        assert c.lhs == Var(b.var) and c.rel == ">" and c.rhs == Val(0)


def test_new_effect():
    items = infer_effect({}, parse_expr("new Transfer"), P)
    assert items == [Enew("Transfer", P.cls("Transfer").fields)]


def test_recursion_rejected():
    p = parse_program("""
    class Loop implements Object {
      n : int
      def go(k : int) : int { this.go(k) }
    }
    null""")
    with pytest.raises(EffectError):
        infer_method_effect(p.cls("Loop").method("go"), p, "Loop")


def test_json_tags():
    js = effect_json(effect("deposit"))
    assert [i["tag"] for i in js["effects"]] == ["EretField", "Eop", "Evar"]


@pytest.mark.parametrize("m", [m.name for m in ACC.methods])
def test_flat_and_capture_free(m):
    items = effect(m).items
    allowed = (EretVal, EretVar, EretField, Eop, Evar, Enew)
    assert all(type(i) in allowed for i in items)
    binders = [i.target.var for i in items
               if isinstance(i, Evar) and isinstance(i.target, (VbindL, VbindC))]
    assert len(binders) == len(set(binders))
    source_names = {"this", ACC.method(m).param}
    assert not set(binders) & source_names


def _concrete(v):
    return eval_term(v, {}) if isinstance(v, Op) else v


def _run_effect(m, state, arg):
    """Execute the inferred effect of x.m(arg) on concrete values."""
    md = ACC.method(m)
    cfg = EConfiguration(heap={k: (c, dict(f)) for k, (c, f) in state.heap.items()})
    cfg.stack = {"this": state.stack["x"],
                 md.param: state.stack[arg.name] if isinstance(arg, Var) else arg.value}
    out = update_s(effect(m), cfg, P)
    return {k: (c, {f: _concrete(v) for f, v in fs.items()}) for k, (c, fs) in out.heap.items()}


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["init", "withdraw", "deposit", "accrueInterest", "getBalance"]),
       st.integers(-300, 300), st.integers(-300, 300), st.integers(0, 200))
def test_effect_agrees_with_interpreter(m, arg, bal, mc):
    s = build_state(P, {"x": ("Account", {"balance": bal, "min_cash": mc})})
    assert _run_effect(m, s, Val(arg)) == update(Call("x", m, Val(arg)), s, P).heap


@settings(max_examples=80, deadline=None)
@given(st.integers(-300, 300), st.integers(-300, 300), st.integers(-300, 300), st.booleans())
def test_transfer_effect_agrees_with_interpreter(amount, b1, b2, self_transfer):
    s = build_state(P, {
        "x": ("Account", {"balance": b1, "min_cash": 50}),
        "y": ("Account", {"balance": b2, "min_cash": 50}),
        "t": ("Transfer", {"amount": amount, "account": "x" if self_transfer else "y"}),
    })
    assert _run_effect("transfer", s, Var("t")) == update(Call("x", "transfer", Var("t")), s, P).heap
