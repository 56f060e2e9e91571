"""Shared helpers: parsing shortcuts and a seeded random problem
generator used by property and integrality tests."""

from __future__ import annotations

import random

import pytest

from fo2mc.logic import (And, Atom, CardCompare, Counting, Eq, Exists, Forall,
                         Formula, Iff, Implies, LinearExpr, Not, Or, Signature,
                         CARD_TRUE)
from fo2mc.parser import Problem, parse_problem

RUNNING_EXAMPLE = """\
predicate A/1
predicate R/2
forall x forall y (A(x) & R(x,y) & x != y -> A(y))
"""

ZERO_OR_TWO_EXAMPLE = "forall x (forall y !R(x,y) | exists{=2} y R(x,y))"


@pytest.fixture
def running_problem() -> Problem:
    return parse_problem(RUNNING_EXAMPLE)


def random_qf(rng: random.Random, atoms: list[Formula], depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(atoms)
    kind = rng.randrange(5)
    if kind == 0:
        return Not(random_qf(rng, atoms, depth - 1))
    left = random_qf(rng, atoms, depth - 1)
    right = random_qf(rng, atoms, depth - 1)
    return [And, Or, Implies, Iff][kind - 1](left, right)


def random_problem(seed: int) -> Problem:
    """A random small-signature problem: a universal matrix over at most
    two unary and one binary predicate, optionally a forall-exists
    conjunct, a counting conjunct (in a shape the matrix pins), and a
    cardinality constraint."""
    rng = random.Random(seed)
    signature = Signature()
    signature.declare("A", 1)
    signature.declare("B", 1)
    signature.declare("R", 2)
    atoms = [Atom("A", ("x",)), Atom("A", ("y",)), Atom("B", ("x",)),
             Atom("B", ("y",)), Atom("R", ("x", "x")), Atom("R", ("x", "y")),
             Atom("R", ("y", "x")), Atom("R", ("y", "y")), Eq("x", "y")]
    conjuncts: list[Formula] = [
        Forall("x", Forall("y", random_qf(rng, atoms, rng.randrange(1, 4))))]
    if rng.random() < 0.5:
        unary_atoms = [Atom("A", ("x",)), Atom("B", ("x",)),
                       Atom("R", ("x", "y")), Atom("R", ("y", "x"))]
        conjuncts.append(Forall("x", Exists("y", random_qf(rng, unary_atoms, 2))))
    if rng.random() < 0.5:
        m = rng.choice((1, 1, 2))
        body = Atom("R", ("x", "y"))
        if rng.random() < 0.5:
            conjuncts.append(Forall("x", Counting("=", m, "y", body)))
        else:
            conjuncts.append(Forall("x", Or(Forall("y", Not(body)),
                                            Counting("=", m, "y", body))))
    sentence = conjuncts[0]
    for extra in conjuncts[1:]:
        sentence = And(sentence, extra)
    constraint = CARD_TRUE
    if rng.random() < 0.4:
        pred = rng.choice(("A", "B", "R"))
        op = rng.choice(("=", "<=", ">="))
        bound = rng.randrange(0, 5)
        constraint = CardCompare(op, LinearExpr.card(pred), LinearExpr.of(bound))
    return Problem(signature, sentence, constraint)
