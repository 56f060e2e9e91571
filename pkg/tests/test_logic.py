import pytest
from fractions import Fraction

from fo2mc.errors import SemanticError
from fo2mc.logic import (CardCompare, CardNot, CardOr, LinearExpr,
                         Signature, WAdd, WCard, WNum, WPow, conjuncts,
                         decimal_str, free_vars, one_type_slots, slot_bit,
                         substitute, weight_value, weight_predicates)
from fo2mc.parser import parse_formula


def test_signature_rules():
    sig = Signature()
    sig.declare("A", 1)
    sig.declare("R", 2, synthetic=True)
    assert sig.arity("A") == 1
    assert sig.user_predicates() == ["A"]
    with pytest.raises(SemanticError):
        sig.declare("A", 2)
    with pytest.raises(SemanticError):
        sig.declare("x", 1)
    with pytest.raises(SemanticError):
        sig.arity("missing")


def test_one_type_slot_order():
    sig = Signature()
    sig.declare("R", 2)
    sig.declare("B", 1)
    sig.declare("A", 1)
    assert one_type_slots(sig) == [("A", "unary"), ("B", "unary"),
                                   ("R", "reflexive")]


def test_slot_bit_big_endian():
    # slot 0 is the most significant bit of a packed index
    assert [slot_bit(1, s, 2) for s in (0, 1)] == [0, 1]
    assert [slot_bit(2, s, 2) for s in (0, 1)] == [1, 0]


def test_free_vars_and_substitution():
    f = parse_formula("A(x) & R(x,y) & x != y -> A(y)")
    assert free_vars(f) == {"x", "y"}
    swapped = substitute(f, {"x": "y", "y": "x"})
    assert free_vars(swapped) == {"x", "y"}
    assert substitute(swapped, {"x": "y", "y": "x"}) == f


def test_conjunct_splitting():
    f = parse_formula("A(x) & (B(x) & C(x)) & D(x)")
    names = [c.pred for c in conjuncts(f)]
    assert names == ["A", "B", "C", "D"]


def test_linear_expr_eval():
    e = LinearExpr.of(1, A=2, R=-1)
    assert e.evaluate({"A": 3, "R": 4}) == 3
    assert e.predicates() == {"A", "R"}


def test_constraint_boolean_combinations():
    a2 = CardCompare("=", LinearExpr.card("A"), LinearExpr.of(2))
    a0 = CardCompare("=", LinearExpr.card("A"), LinearExpr.of(0))
    either = CardOr((a2, a0))
    assert either.holds({"A": 0}) and either.holds({"A": 2})
    assert not either.holds({"A": 1})
    assert CardNot(either).holds({"A": 1})


def test_weight_expression_evaluation():
    expr = WAdd(WNum(Fraction(1)), WPow(WNum(Fraction(-1)), WCard("H")))
    assert weight_value(expr, {"H": 3}) == 0
    assert weight_value(expr, {"H": 2}) == 2
    assert weight_predicates(expr) == {"H"}


def test_weight_fractional_exponent_rejected():
    expr = WPow(WNum(Fraction(2)), WNum(Fraction(1, 2)))
    with pytest.raises(SemanticError, match="exponent"):
        weight_value(expr, {})


def test_decimal_str():
    assert decimal_str(Fraction(3)) == "3"
    assert decimal_str(Fraction(1, 8)) == "0.125"
    assert decimal_str(Fraction(-27, 20)) == "-1.35"
    assert decimal_str(Fraction(1, 3)) == "1/3"


def test_formula_repr_round_trips():
    text = "forall x (A(x) -> exists{=2} y (R(x,y) | x = y))"
    f = parse_formula(text)
    assert parse_formula(str(f)) == f
