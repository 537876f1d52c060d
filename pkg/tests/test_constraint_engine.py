import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ant.bounds import BoundedDomain
from ant.formula import (
    FALSE,
    TRUE,
    And,
    Cmp,
    Forall,
    FormulaError,
    Implies,
    Not,
    Op,
    Or,
    Sym,
    compile_formula,
    emit_smtlib,
    eval_formula,
    eval_term,
    from_json,
    normalize_term,
    sat_bounded,
    simplify,
    to_json,
    valid_bounded,
)

x, y, z = Sym("x"), Sym("y"), Sym("z", "param")
D = BoundedDomain(-3, 3)


def test_eval_term_truncates():
    assert eval_term(Op("/", x, 2), {"x": -7}) == -3
    assert eval_term(Op("/", x, -2), {"x": 7}) == -3


def test_eval_term_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        eval_term(Op("/", 1, x), {"x": 0})


def test_eval_unbound():
    with pytest.raises(FormulaError):
        eval_term(x, {})


def test_eval_forall_over_domain():
    f = Forall(x, Cmp(Op("*", x, x), ">=", 0))
    assert eval_formula(f, {}, D)
    assert not eval_formula(Forall(x, Cmp(x, "<", y)), {"y": 3}, D)
    assert eval_formula(Forall(x, Cmp(x, "<", y)), {"y": 4}, D)


def test_sat_witness():
    w = sat_bounded(And((Cmp(x, ">", 1), Cmp(Op("+", x, y), "=", 0))), D)
    assert w["x"] > 1 and w["x"] + w["y"] == 0


def test_unsat():
    assert sat_bounded(And((Cmp(x, ">", 1), Cmp(x, "<", 1))), D) is None


def test_valid_with_context():
    f = Cmp(Op("+", x, z), ">=", 0)
    assert not valid_bounded(f, D)
    assert valid_bounded(f, D, [Cmp(x, ">=", 0), Cmp(z, ">", 0)])


def test_counterexample_refutes():
    f = Cmp(Op("-", x, z), ">=", 0)
    v = valid_bounded(f, D, [Cmp(x, ">=", 0)])
    assert not v
    assert not eval_formula(f, v.counterexample, D)


def test_unsatisfiable_context_is_vacuous():
    assert valid_bounded(FALSE, D, [Cmp(x, ">", 5)])


def test_enumeration_cap():
    syms = [Sym(f"v{i}") for i in range(9)]
    big = And(tuple(Cmp(s, ">=", 0) for s in syms))
    with pytest.raises(FormulaError, match="emit_smtlib"):
        sat_bounded(big, D)
    assert sat_bounded(big, D, cap=9) is not None


def test_disjunction_split_avoids_cap():
    syms = [Sym(f"v{i}") for i in range(12)]
    f = Or(tuple(Cmp(s, "=", 1) for s in syms))
    assert sat_bounded(f, D) is not None


def test_normalize_term():
    assert normalize_term(Op("+", Op("+", 1, x), 2)) == normalize_term(Op("+", x, 3))
    assert normalize_term(Op("*", y, x)) == normalize_term(Op("*", x, y))


@pytest.mark.parametrize("f,expect", [
    (And((TRUE, Cmp(x, ">", 0))), Cmp(x, ">", 0)),
    (Or((Cmp(x, ">", 0), TRUE)), TRUE),
    (Not(Not(Cmp(x, ">", 0))), Cmp(x, ">", 0)),
    (Cmp(Op("+", x, 1), "=", Op("+", 1, x)), TRUE),
    (Cmp(x, "<", x), FALSE),
    (Implies(FALSE, Cmp(x, ">", 0)), TRUE),
    (Implies(Cmp(x, ">", 0), FALSE), Not(Cmp(x, ">", 0))),
    (Forall(y, Cmp(x, ">", 0)), Cmp(x, ">", 0)),
    (Cmp(3, "<", 2), FALSE),
])
def test_simplify_examples(f, expect):
    assert simplify(f) == expect


def test_simplify_keeps_possible_division_by_zero():
    f = Cmp(Op("/", 1, x), "=", Op("/", 1, x))
    assert simplify(f) != TRUE


# -- SMT-LIB -------------------------------------------------------------------------


PHI = Forall(x, Implies(Cmp(x, ">=", 0), Cmp(Op("/", Op("*", x, z), 100), ">=", Op("-", 0, x))))


def test_smtlib_fragments():
    s = emit_smtlib(PHI)
    assert s.startswith("(set-logic NIA)\n")
    assert "(define-fun tdiv" in s
    assert "(declare-const z Int) ; param" in s
    assert "(forall ((x Int))" in s
    assert "(tdiv (* x z) 100)" in s
    assert s.rstrip().endswith("(check-sat)")


def test_smtlib_negated_and_quantifier_free():
    s = emit_smtlib(Cmp(x, "!=", -2), negate=True)
    assert "(set-logic QF_NIA)" in s
    assert "(assert (not (not (= x (- 2)))))" in s


def test_smtlib_deterministic():
    assert emit_smtlib(PHI) == emit_smtlib(PHI)
    g = And((Cmp(y, ">", 0), Cmp(x, ">", 0)))
    decls = [l for l in emit_smtlib(g).splitlines() if l.startswith("(declare")]
    assert decls == ["(declare-const x Int) ; weak", "(declare-const y Int) ; weak"]


def test_smtlib_agrees_with_external_solver():
    z3 = pytest.importorskip("z3")
    cases = (
        Forall(x, Cmp(Op("*", x, x), ">=", 0)),
        Forall(x, Cmp(Op("*", x, x), ">", 0)),
        Forall(x, Implies(Cmp(x, ">=", 0), Cmp(Op("*", Op("/", x, 100), 100), "<=", x))),
        Forall(x, Cmp(Op("*", Op("/", x, 2), 2), "=", x)),
    )
    for f in cases:
        s = z3.Solver()
        s.from_string(emit_smtlib(f, negate=True))
        # the bounded verdict over a small range agrees with the unbounded one here
        assert (s.check() == z3.unsat) == bool(valid_bounded(f, D))


# -- properties ------------------------------------------------------------------------


VARS = [x, y, z]

terms = st.recursive(
    st.one_of(st.sampled_from(VARS), st.integers(-4, 4)),
    lambda t: st.builds(Op, st.sampled_from(["+", "-", "*", "/"]), t, t),
    max_leaves=5,
)
atoms = st.builds(Cmp, terms, st.sampled_from(["=", "!=", "<", "<=", ">", ">="]), terms)
formulas = st.recursive(
    st.one_of(atoms, st.sampled_from([TRUE, FALSE])),
    lambda f: st.one_of(
        st.builds(lambda a, b: And((a, b)), f, f),
        st.builds(lambda a, b: Or((a, b)), f, f),
        st.builds(Not, f),
        st.builds(Implies, f, f),
        st.builds(Forall, st.sampled_from(VARS), f),
    ),
    max_leaves=6,
)
SMALL = BoundedDomain(-2, 2)
ASSIGNMENTS = [dict(zip("xyz", v)) for v in itertools.product(SMALL.values, repeat=3)]


def _eval(f, a):
    try:
        return eval_formula(f, a, SMALL)
    except ZeroDivisionError:
        return None


@settings(max_examples=150, deadline=None)
@given(formulas)
def test_simplify_preserves_meaning(f):
    g = simplify(f)
    for a in ASSIGNMENTS:
        before = _eval(f, a)
        if before is not None:
            assert _eval(g, a) == before


@settings(max_examples=150, deadline=None)
@given(formulas)
def test_compiled_matches_interpreted(f):
    fn = compile_formula(f, ["x", "y", "z"])
    for a in ASSIGNMENTS:
        want = _eval(f, a)
        if want is None:
            continue
        try:
            assert fn(SMALL.values, a["x"], a["y"], a["z"]) == want
        except ZeroDivisionError:
            pass  # the compiled form may evaluate operands eagerly in a different order


@settings(max_examples=100, deadline=None)
@given(formulas)
def test_sat_valid_duality(f):
    try:
        valid = bool(valid_bounded(f, SMALL))
        refuter = sat_bounded(Not(f), SMALL)
    except ZeroDivisionError:
        return
    assert valid == (refuter is None)


@settings(max_examples=100, deadline=None)
@given(formulas)
def test_sat_witness_satisfies(f):
    try:
        w = sat_bounded(f, SMALL)
    except ZeroDivisionError:
        return
    if w is not None:
        assert _eval(f, {**{"x": 0, "y": 0, "z": 0}, **w}) in (True, None)


@settings(max_examples=100, deadline=None)
@given(formulas)
def test_json_round_trip(f):
    assert from_json(to_json(f)) == f
