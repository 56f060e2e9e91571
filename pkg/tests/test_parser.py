import pytest
from fractions import Fraction

from fo2mc.errors import ParseError, SemanticError
from fo2mc.logic import (And, Atom, CardCompare, Counting, Eq, Forall,
                         Implies, LinearExpr, Not)
from fo2mc.parser import (format_problem, parse_cardinality, parse_formula,
                          parse_problem, parse_weight_expr)


def test_running_example_ast():
    p = parse_problem("""
    predicate A/1
    predicate R/2
    forall x forall y (A(x) & R(x,y) & x != y -> A(y))
    """)
    expected = Forall("x", Forall("y", Implies(
        And(And(Atom("A", ("x",)), Atom("R", ("x", "y"))), Not(Eq("x", "y"))),
        Atom("A", ("y",)))))
    assert p.sentence == expected


def test_counting_quantifier_ast():
    f = parse_formula("forall x exists{=2} y R(x,y)")
    assert f == Forall("x", Counting("=", 2, "y", Atom("R", ("x", "y"))))
    f = parse_formula("exists{<=1} y R(x,y)")
    assert f.cmp == "<=" and f.count == 1
    f = parse_formula("exists{>=3} y R(x,y)")
    assert f.cmp == ">=" and f.count == 3


def test_undeclared_predicate_strict():
    with pytest.raises(ParseError, match="undeclared predicate A"):
        parse_problem("predicate R/2\nforall x (A(x))")


def test_lenient_mode_autodeclares():
    p = parse_problem("forall x (A(x))")
    assert p.signature.arity("A") == 1


def test_arity_clash():
    with pytest.raises(ParseError, match="arity"):
        parse_problem("forall x (A(x) & A(x,x))")


def test_free_variable_rejected():
    with pytest.raises(SemanticError, match="free variable"):
        parse_problem("forall x R(x,y)")


def test_rebinding_rejected():
    with pytest.raises(ParseError, match="rebinding"):
        parse_formula("forall x forall x A(x)")


def test_only_x_y_variables():
    with pytest.raises(ParseError, match="x or y"):
        parse_formula("forall z A(z)")


def test_reserved_synthetic_names():
    with pytest.raises(ParseError, match="reserved"):
        parse_problem("forall x __A1(x)")


def test_tight_quantifier_scope():
    f = parse_formula("forall x A(x) & forall x B(x)")
    assert isinstance(f, And)
    assert isinstance(f.left, Forall) and isinstance(f.right, Forall)


def test_implication_right_associative():
    f = parse_formula("forall x (A(x) -> B(x) -> C(x))")
    body = f.body
    assert isinstance(body, Implies) and isinstance(body.right, Implies)


def test_error_position():
    with pytest.raises(ParseError) as err:
        parse_problem("forall x\n(A(x) &)")
    assert err.value.line == 2


def test_constraints():
    p = parse_problem("""
    predicate A/1
    predicate R/2
    forall x (A(x) | !A(x))
    constraint 2*|A| <= |R| + 1
    constraint |A| = 2 or |A| = 0
    """)
    cards = {"A": 2, "R": 3}
    assert p.constraint.holds(cards)
    assert not p.constraint.holds({"A": 1, "R": 5})
    assert not p.constraint.holds({"A": 2, "R": 2})


def test_constraint_undeclared_predicate():
    with pytest.raises(ParseError, match="undeclared"):
        parse_problem("predicate A/1\nforall x A(x)\nconstraint |Z| = 1")


def test_weights():
    p = parse_problem("""
    predicate H/1
    forall x (H(x) | !H(x))
    weight H 0.5 2
    profileweight 1 + (-1)^|H|
    """)
    assert p.symmetric_weights["H"] == (Fraction(1, 2), Fraction(2))
    from fo2mc.logic import weight_value
    assert weight_value(p.profile_weight, {"H": 1}) == 0
    assert weight_value(p.profile_weight, {"H": 2}) == 2


def test_duplicate_weight_rejected():
    with pytest.raises(ParseError, match="duplicate"):
        parse_problem("predicate H/1\nforall x H(x)\nweight H 1 1\nweight H 2 1")


def test_parse_cardinality_helper():
    p = parse_problem("predicate H/1\nforall x (H(x) | !H(x))")
    c = parse_cardinality("|H| = 2", p.signature)
    assert c == CardCompare("=", LinearExpr.card("H"), LinearExpr.of(2))


def test_parse_weight_expr_helper():
    p = parse_problem("predicate H/1\nforall x (H(x) | !H(x))")
    from fo2mc.logic import weight_value
    w = parse_weight_expr("(|H| - 1)^2", p.signature)
    assert weight_value(w, {"H": 3}) == 4


def test_format_problem_round_trip(running_problem):
    text = format_problem(running_problem)
    again = parse_problem(text)
    assert again.sentence == running_problem.sentence
    assert again.constraint == running_problem.constraint


def test_comments_ignored():
    p = parse_problem("# a problem\npredicate A/1  # unary\nforall x (A(x))")
    assert p.signature.arity("A") == 1
