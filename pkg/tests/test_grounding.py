import pytest

from fo2mc.errors import SemanticError
from fo2mc.grounding import eval_qf, ground
from fo2mc.logic import And, Atom, Eq, Not, Or
from fo2mc.parser import parse_formula, parse_problem


def models(gf):
    return [a for a in range(1 << len(gf.atoms)) if gf.evaluate(a)]


def test_ground_atom_universe(running_problem):
    gf = ground(running_problem.signature, running_problem.sentence, 3)
    assert len(gf.atoms) == 3 + 9  # one unary, one binary predicate
    assert running_problem.signature.ground_atom_count(3) == 12


def test_running_example_n2_models(running_problem):
    gf = ground(running_problem.signature, running_problem.sentence, 2)
    assert len(models(gf)) == 48


def test_equality_grounding():
    p = parse_problem("forall x forall y (x = y)")
    assert len(models(ground(p.signature, p.sentence, 2))) == 0
    assert len(models(ground(p.signature, p.sentence, 1))) == 1


def test_counting_grounding():
    p = parse_problem("forall x exists{=1} y R(x,y)")
    gf = ground(p.signature, p.sentence, 2)
    found = models(gf)
    assert len(found) == 4
    # each model has exactly one successor per row
    for m in found:
        row0 = sum(m >> gf.index[("R", 0, d)] & 1 for d in range(2))
        row1 = sum(m >> gf.index[("R", 1, d)] & 1 for d in range(2))
        assert row0 == row1 == 1


def test_ground_rejects_empty_domain(running_problem):
    with pytest.raises(SemanticError):
        ground(running_problem.signature, running_problem.sentence, 0)


def test_eval_qf_falsifying_assignment(running_problem):
    # A(x)=0 R(x,x)=1 A(y)=1 R(y,y)=1 R(x,y)=0 R(y,x)=1 falsifies the
    # cross conjunct read from y to x
    matrix = And(And(
        parse_formula("A(x) & R(x,x) & x != x -> A(x)"),
        parse_formula("A(x) & R(x,y) & x != y -> A(y)")), And(
        parse_formula("A(y) & R(y,x) & y != x -> A(x)"),
        parse_formula("A(y) & R(y,y) & y != y -> A(y)")))
    tau = {Atom("A", ("x",)): 0, Atom("R", ("x", "x")): 1,
           Atom("A", ("y",)): 1, Atom("R", ("y", "y")): 1,
           Atom("R", ("x", "y")): 0, Atom("R", ("y", "x")): 1}
    assert eval_qf(matrix, tau) == 0


def test_eval_qf_fixed_equality():
    assert eval_qf(Eq("x", "x"), {}) == 1
    assert eval_qf(Eq("x", "y"), {}) == 0
    assert eval_qf(Not(Eq("x", "y")), {}) == 1


def test_eval_qf_tautology_and_false_antecedent():
    a = Atom("A", ("x",))
    assert eval_qf(Or(a, Not(a)), {a: 0}) == 1
    assert eval_qf(Or(a, Not(a)), {a: 1}) == 1
    f = parse_formula("A(x) & R(x,y) & x != y -> A(y)")
    tau = {Atom("A", ("x",)): 0, Atom("R", ("x", "y")): 1, Atom("A", ("y",)): 0}
    assert eval_qf(f, tau) == 1


def test_eval_qf_unassigned_atom():
    with pytest.raises(SemanticError, match="unassigned"):
        eval_qf(Atom("A", ("x",)), {})


def test_eval_qf_rejects_quantifiers():
    with pytest.raises(SemanticError, match="quantifier-free"):
        eval_qf(parse_formula("forall x A(x)"), {})
