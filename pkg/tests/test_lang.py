import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_belief, make_object
from gen import random_belief, random_expr
from oracles import brute_eval, heavy_oracle
from owgp.belief import ObservationNoiseModel, Vocabulary, update_weight
from owgp.lang.ast import (
    KRD,
    And,
    BBool,
    Const,
    Den,
    Exists,
    GoalFormula,
    Lambda,
    Or,
    Rel,
    Skolem,
    Var,
    alpha_rename,
    bind_terms,
    free_vars,
    substitute,
)
from owgp.lang.evaluate import (
    EvaluationError,
    UnsupportedExpression,
    den_prob,
    eval_expr,
    holds,
    krd,
    p_or,
    props_for,
)
from owgp.lang.parser import (
    DefiniteDescriptionError,
    GoalSyntaxError,
    UnboundVariableError,
    UnknownRelationError,
    expr_text,
    goal_text,
    parse_expr,
    parse_goal,
)

X = Var("x")
ILLUSTRATIVE = "lambda x. and(can(x), and(green(x), heavy(x)))"


# parsing --------------------------------------------------------------------------------

def test_parse_illustrative_expr():
    e = parse_expr(ILLUSTRATIVE)
    assert e == Lambda("x", And(Rel("can", (X,)), And(Rel("green", (X,)), Rel("heavy", (X,)))))


def test_parse_green_goal():
    g = parse_goal("exists o. B(den(lambda x. green(x), o), 0.9) & B(in(o, table1), 0.9)")
    assert g.variables == ("o",)
    den, inside = g.fluents
    assert den == BBool(Den(Lambda("x", Rel("green", (X,))), Var("o")), 0.9)
    assert inside == BBool(Rel("in", (Var("o"), Const("table1"))), 0.9)


def test_parse_errors():
    with pytest.raises(UnboundVariableError):
        parse_expr("lambda x. green(y)")
    with pytest.raises(DefiniteDescriptionError):
        parse_expr("the x. green(x)")
    with pytest.raises(GoalSyntaxError) as err:
        parse_goal("B(den(lambda x. green(x), o), 1.5)")
    assert "column" in str(err.value)
    with pytest.raises(UnknownRelationError):
        parse_expr("lambda x. purple(x)", Vocabulary(("can",)))
    with pytest.raises(GoalSyntaxError):
        parse_goal("B(den(lambda x. green(x), o), 0.9) &")


def test_parse_other_fluents():
    g = parse_goal("KRD(_o2_) & BContents(_reg2_, 0.9) & B(ExistsIn(lambda x. can(x), _reg2_), 0.1)")
    assert g.fluents[0] == KRD(Const("_o2_"))
    assert g.fluents[1].region == "_reg2_" and g.fluents[2].p == 0.1


@given(st.integers(0, 10 ** 6))
def test_print_parse_fixed_point(seed):
    rng = np.random.default_rng(seed)
    body = random_expr(rng, 4, [], bound=("x",))
    body = _unary_only(body)
    lam = Lambda("x", body)
    assert parse_expr(expr_text(lam)) == lam
    goal = GoalFormula(("o",), (BBool(Den(lam, Var("o")), 0.9), BBool(Rel("on", (Var("o"), Const("desk"))), 0.5)))
    assert parse_goal(goal_text(goal)) == goal


def _unary_only(e):
    # the concrete grammar only allows unary relations on variables in bodies
    if isinstance(e, Rel):
        return Rel(e.name if len(e.args) == 1 else "true", (e.args[0],)) if isinstance(e.args[0], Var) \
            else Rel("true", (Var("x"),))
    if isinstance(e, (And, Or)):
        return type(e)(_unary_only(e.left), _unary_only(e.right))
    return Exists(e.var, _unary_only(e.body))


# substitution ------------------------------------------------------------------------------

def test_substitute_examples():
    lam = parse_expr("lambda x. green(x)")
    assert substitute(lam.body, {"x": Const("_o2_")}) == Rel("green", (Const("_o2_"),))
    assert substitute(lam.body, {}) is lam.body
    ex = Exists("x", Rel("red", (X,)))
    assert substitute(ex, {"x": Const("o1")}) == ex


def test_free_vars_and_bind_terms():
    e = And(Rel("can", (X,)), Exists("y", Rel("on", (Var("y"), Var("z")))))
    assert free_vars(e) == {"x", "z"}
    f = BBool(Den(parse_expr("lambda x. can(x)"), Skolem(1)), 0.9)
    assert bind_terms(f, {Skolem(1): Const("_o4_")}).phi.term == Const("_o4_")


# evaluation ------------------------------------------------------------------------------------

def _belief():
    return make_belief([make_object("_o1_", types={"can": 0.8, "box": 0.2}),
                        make_object("_o2_", types={"can": 0.9, "box": 0.1}),
                        make_object("_o3_", types={"can": 0.5, "box": 0.5})])


def test_eval_connectives():
    b = _belief()
    a, c = Rel("can", (Const("_o1_"),)), Rel("can", (Const("_o2_"),))
    assert eval_expr(And(a, c), b) == pytest.approx(0.72)
    assert eval_expr(Or(a, c), b) == pytest.approx(0.98)
    two = make_belief([make_object("_o1_"), make_object("_o2_")])
    assert eval_expr(Exists("x", Rel("can", (X,))), two) == pytest.approx(0.75)


def test_eval_repeated_instance_is_independent():
    b = _belief()
    a = Rel("can", (Const("_o1_"),))
    assert eval_expr(And(a, a), b) == pytest.approx(0.64)


def test_eval_errors():
    b = _belief()
    with pytest.raises(EvaluationError):
        eval_expr(Rel("can", (X,)), b)
    with pytest.raises(EvaluationError):
        eval_expr(Lambda("x", Rel("can", (X,))), b)
    with pytest.raises(EvaluationError):
        den_prob(parse_expr("lambda x. can(x)"), Const("_o9_"), b)


def test_den_prob_examples():
    b = make_belief([make_object("_o2_", types={"can": 0.8, "box": 0.2}, w=0.7)])
    assert den_prob(parse_expr("lambda x. can(x)"), "_o2_", b) == pytest.approx(0.56)
    assert den_prob(parse_expr("lambda x. true(x)"), "_o2_", b) == pytest.approx(0.7)
    assert den_prob(parse_expr("lambda x. can(x)"), Skolem(1), b) == 0.0


def test_den_after_light_weighing_is_implausible():
    b = make_belief([make_object("_o2_", types={"can": 0.8, "box": 0.2}, color=(0.33, 0.7, 0.6),
                                 color_std=(0.08, 0.15, 0.15))])
    noise = ObservationNoiseModel.diagonal(("can", "box"))
    b = update_weight(b, "_o2_", 100.0, noise)
    expr = parse_expr(ILLUSTRATIVE)
    p = den_prob(expr, "_o2_", b)
    w = b.objects["_o2_"].weight_d
    assert p < 0.01
    assert p <= 0.8 * heavy_oracle(w.mu, w.sigma, 400.0) + 1e-15
    assert not holds(BBool(Den(expr, Const("_o2_")), 0.9), b)


def test_props_for_examples():
    assert props_for(parse_expr(ILLUSTRATIVE)) == {("type", "can"), ("color", "green"), ("weight", "heavy")}
    assert props_for(parse_expr("lambda x. green(x)")) == {("color", "green")}
    with pytest.raises(UnsupportedExpression):
        props_for(parse_expr("lambda x. or(red(x), blue(x))"))


def test_krd_examples():
    assert krd(Const("_o2_"))
    assert not krd(Var("o"))
    assert not krd(Skolem(1))


def test_or_fold_identity():
    assert p_or(0.0, 0.3) == 0.3


@given(st.integers(0, 10 ** 6))
def test_eval_matches_brute_oracle_and_is_bounded(seed):
    rng = np.random.default_rng(seed)
    b = random_belief(rng, int(rng.integers(1, 5)))
    e = random_expr(rng, 4, b.anchors())
    v = eval_expr(e, b)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(brute_eval(e, b), abs=1e-12)


@given(st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_or_and_commutative_associative(ps):
    a, b, c = ps
    assert p_or(a, b) == pytest.approx(p_or(b, a), abs=1e-12)
    assert p_or(p_or(a, b), c) == pytest.approx(p_or(a, p_or(b, c)), abs=1e-12)
    assert (a * b) * c == pytest.approx(a * (b * c), abs=1e-12)


@given(st.integers(0, 10 ** 6), st.floats(0.0, 0.5))
def test_eval_monotone_in_leaf(seed, bump):
    """Raising one object's type probability never lowers the result."""
    rng = np.random.default_rng(seed)
    b = random_belief(rng, 3)
    e = random_expr(rng, 4, b.anchors())
    ob = b.objects["_o1_"]
    p = min(1.0, ob.type_d["can"] + bump)
    from dataclasses import replace

    from owgp.belief import TypeDistribution

    up = b.with_object(replace(ob, type_d=TypeDistribution({"can": p, "box": 1 - p})))
    # monotone only for expressions that mention can but not box (box moves the other way)
    if "box" in repr(e):
        return
    assert eval_expr(e, up) >= eval_expr(e, b) - 1e-12


@given(st.integers(0, 10 ** 6), st.sampled_from(["y", "obj", "z9"]))
def test_den_alpha_invariant(seed, new):
    rng = np.random.default_rng(seed)
    b = random_belief(rng, 3)
    body = random_expr(rng, 3, b.anchors(), bound=("x",))
    lam = Lambda("x", body)
    if new in repr(body):
        return
    assert den_prob(alpha_rename(lam, new), "_o2_", b) == pytest.approx(den_prob(lam, "_o2_", b), abs=1e-15)
