"""Recursive-descent parser for the problem file format.

A problem is: predicate declarations, one sentence, then optional
``constraint`` lines and weight declarations::

    predicate A/1
    predicate R/2
    forall x forall y (A(x) & R(x,y) & x != y -> A(y))
    constraint |A| = 2
    weight R 1 2

A quantifier binds the next unary formula (atom, negation, quantified
formula or parenthesized group), so ``forall x A(x) & B(x)`` conjoins
``forall x A(x)`` with an open ``B(x)``; parenthesize for wider scope.
``#`` starts a comment.  Variables are the fixed lexemes ``x`` and ``y``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseError, SemanticError
from .logic import (And, Atom, CardAnd, CardCompare, CardConstraint, CardNot,
                    CardOr, Counting, Eq, Exists, Forall, Formula, Iff,
                    Implies, LinearExpr, Not, Or, Signature, WeightExpr,
                    WAdd, WCard, WMul, WNeg, WNum, WPow, WSub, CARD_TRUE,
                    SYNTHETIC_PREFIX, VARIABLES, card_conjoin, free_vars)

KEYWORDS = {"predicate", "forall", "exists", "constraint", "weight",
            "profileweight", "and", "or", "not"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>\d+\.\d+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|!=|<=|>=|[()\{\},/=<>+\-*^|&!.])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # num | int | name | op | eof
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.start() != pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind != "ws":
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class Problem:
    """A parsed input: signature, sentence, cardinality constraint and any
    weight declarations."""

    signature: Signature
    sentence: Formula
    constraint: CardConstraint = CARD_TRUE
    symmetric_weights: dict[str, tuple[Fraction, Fraction]] = field(default_factory=dict)
    profile_weight: WeightExpr | None = None


class _Parser:
    def __init__(self, tokens: list[Token], signature: Signature, strict: bool,
                 allow_synthetic: bool = False):
        self.tokens = tokens
        self.pos = 0
        self.signature = signature
        self.strict = strict
        self.allow_synthetic = allow_synthetic

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("op", "name")

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text:
            self.fail(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return self.next()

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.column)

    # -- declarations -------------------------------------------------------

    def parse_decls(self) -> None:
        while self.at("predicate"):
            self.next()
            name = self.parse_pred_name(declare=False)
            self.expect("/")
            tok = self.next()
            if tok.kind != "int" or tok.text not in ("1", "2"):
                self.fail("arity must be 1 or 2", tok)
            try:
                self.signature.declare(name, int(tok.text),
                                       synthetic=name.startswith(SYNTHETIC_PREFIX))
            except SemanticError as err:
                self.fail(str(err), tok)

    def parse_pred_name(self, declare: bool) -> str:
        tok = self.peek()
        if tok.kind != "name" or tok.text in KEYWORDS:
            self.fail("expected a predicate name", tok)
        name = tok.text
        if name in VARIABLES:
            self.fail(f"{name!r} is a reserved variable name", tok)
        if name.startswith(SYNTHETIC_PREFIX) and not self.allow_synthetic:
            self.fail(f"names starting with {SYNTHETIC_PREFIX!r} are reserved", tok)
        self.next()
        return name

    def resolve_atom(self, name: str, args: tuple[str, ...], tok: Token) -> Atom:
        if name not in self.signature:
            if self.strict:
                self.fail(f"undeclared predicate {name}", tok)
            self.signature.declare(name, len(args),
                                   synthetic=name.startswith(SYNTHETIC_PREFIX))
        if self.signature.arity(name) != len(args):
            self.fail(f"predicate {name} has arity {self.signature.arity(name)}, "
                      f"used with {len(args)} argument(s)", tok)
        return Atom(name, args)

    # -- formulas -----------------------------------------------------------

    def parse_formula(self, bound: frozenset[str] = frozenset()) -> Formula:
        return self.parse_iff(bound)

    def parse_iff(self, bound) -> Formula:
        out = self.parse_implies(bound)
        while self.at("<->"):
            self.next()
            out = Iff(out, self.parse_implies(bound))
        return out

    def parse_implies(self, bound) -> Formula:
        left = self.parse_or(bound)
        if self.at("->"):
            self.next()
            return Implies(left, self.parse_implies(bound))
        return left

    def parse_or(self, bound) -> Formula:
        out = self.parse_and(bound)
        while self.at("|"):
            self.next()
            out = Or(out, self.parse_and(bound))
        return out

    def parse_and(self, bound) -> Formula:
        out = self.parse_unary(bound)
        while self.at("&"):
            self.next()
            out = And(out, self.parse_unary(bound))
        return out

    def parse_unary(self, bound) -> Formula:
        tok = self.peek()
        if self.at("!"):
            self.next()
            return Not(self.parse_unary(bound))
        if self.at("forall") or self.at("exists"):
            return self.parse_quantifier(bound)
        return self.parse_primary(bound)

    def parse_quantifier(self, bound) -> Formula:
        head = self.next()
        cmp = None
        count = 0
        if head.text == "exists" and self.at("{"):
            self.next()
            op_tok = self.next()
            if op_tok.text not in ("=", "<=", ">="):
                self.fail("expected =, <= or >= in counting quantifier", op_tok)
            cmp = op_tok.text
            num = self.next()
            if num.kind != "int":
                self.fail("expected a non-negative integer multiplicity", num)
            count = int(num.text)
            self.expect("}")
        var_tok = self.next()
        if var_tok.text not in VARIABLES:
            self.fail("quantified variable must be x or y", var_tok)
        var = var_tok.text
        if var in bound:
            self.fail(f"variable {var} is already bound; "
                      "rebinding is not supported", var_tok)
        if self.at("."):
            self.next()
        # tight scope: the quantifier binds the next unary formula, so
        # chains like "forall x exists y R(x,y) & forall x ..." conjoin
        body = self.parse_unary(bound | {var})
        if head.text == "forall":
            return Forall(var, body)
        if cmp is None:
            return Exists(var, body)
        return Counting(cmp, count, var, body)

    def parse_primary(self, bound) -> Formula:
        tok = self.peek()
        if self.at("("):
            self.next()
            inner = self.parse_formula(bound)
            self.expect(")")
            return inner
        if tok.kind != "name":
            self.fail(f"expected a formula, found {tok.text or 'end of input'!r}", tok)
        if tok.text in VARIABLES:
            left = self.next().text
            op = self.next()
            if op.text not in ("=", "!="):
                self.fail("expected = or != after a variable", op)
            right = self.next()
            if right.text not in VARIABLES:
                self.fail("equality arguments must be variables", right)
            eq = Eq(left, right.text)
            return eq if op.text == "=" else Not(eq)
        if tok.text in KEYWORDS:
            self.fail(f"expected a formula, found keyword {tok.text!r}", tok)
        name = self.parse_pred_name(declare=True)
        self.expect("(")
        args = [self.parse_term()]
        if self.at(","):
            self.next()
            args.append(self.parse_term())
        self.expect(")")
        return self.resolve_atom(name, tuple(args), tok)

    def parse_term(self) -> str:
        tok = self.next()
        if tok.text not in VARIABLES:
            self.fail("terms must be the variables x or y", tok)
        return tok.text

    # -- cardinality constraints ---------------------------------------------

    def parse_cardexpr(self) -> CardConstraint:
        out = self.parse_card_and()
        while self.at("or"):
            self.next()
            rhs = self.parse_card_and()
            out = CardOr((out, rhs))
        return out

    def parse_card_and(self) -> CardConstraint:
        out = self.parse_card_factor()
        while self.at("and"):
            self.next()
            out = card_conjoin((out, self.parse_card_factor()))
        return out

    def parse_card_factor(self) -> CardConstraint:
        if self.at("not"):
            self.next()
            return CardNot(self.parse_card_factor())
        if self.at("("):
            self.next()
            inner = self.parse_cardexpr()
            self.expect(")")
            return inner
        left = self.parse_linexpr()
        op_tok = self.next()
        if op_tok.text not in ("=", "<=", ">=", "<", ">"):
            self.fail("expected a comparison operator", op_tok)
        right = self.parse_linexpr()
        return CardCompare(op_tok.text, left, right)

    def parse_linexpr(self) -> LinearExpr:
        coeffs: dict[str, int] = {}
        const = 0
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        while True:
            const, coeffs = self.parse_linterm(sign, const, coeffs)
            if self.at("+"):
                self.next()
                sign = 1
            elif self.at("-"):
                self.next()
                sign = -1
            else:
                break
        items = tuple(sorted((p, c) for p, c in coeffs.items() if c))
        return LinearExpr(items, const)

    def parse_linterm(self, sign, const, coeffs):
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            value = int(tok.text)
            if self.at("*"):
                self.next()
                pred = self.parse_card_atom()
                coeffs[pred] = coeffs.get(pred, 0) + sign * value
            else:
                const += sign * value
        elif self.at("|"):
            pred = self.parse_card_atom()
            coeffs[pred] = coeffs.get(pred, 0) + sign
        else:
            self.fail("expected an integer or |predicate|", tok)
        return const, coeffs

    def parse_card_atom(self) -> str:
        self.expect("|")
        tok = self.peek()
        name = self.parse_pred_name(declare=False)
        if name not in self.signature:
            self.fail(f"cardinality constraint mentions undeclared predicate {name}", tok)
        self.expect("|")
        return name

    # -- weights --------------------------------------------------------------

    def parse_number(self) -> Fraction:
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        tok = self.next()
        if tok.kind not in ("int", "num"):
            self.fail("expected a number", tok)
        return sign * Fraction(tok.text)

    def parse_wexpr(self) -> WeightExpr:
        out = self.parse_wterm()
        while self.at("+") or self.at("-"):
            op = self.next().text
            rhs = self.parse_wterm()
            out = WAdd(out, rhs) if op == "+" else WSub(out, rhs)
        return out

    def parse_wterm(self) -> WeightExpr:
        out = self.parse_wfactor()
        while self.at("*"):
            self.next()
            out = WMul(out, self.parse_wfactor())
        return out

    def parse_wfactor(self) -> WeightExpr:
        base = self.parse_watom()
        if self.at("^"):
            self.next()
            return WPow(base, self.parse_watom())
        return base

    def parse_watom(self) -> WeightExpr:
        tok = self.peek()
        if self.at("-"):
            self.next()
            return WNeg(self.parse_watom())
        if self.at("("):
            self.next()
            inner = self.parse_wexpr()
            self.expect(")")
            return inner
        if self.at("|"):
            return WCard(self.parse_card_atom())
        if tok.kind in ("int", "num"):
            self.next()
            return WNum(Fraction(tok.text))
        self.fail("expected a number, |predicate| or parenthesized expression", tok)


def parse_problem(text: str, strict: bool | None = None,
                  allow_synthetic: bool = False) -> Problem:
    """Parse a complete problem.  With ``strict=None`` declarations are
    required exactly when at least one ``predicate`` line is present;
    otherwise predicates are declared implicitly from their first use.
    ``allow_synthetic`` admits reserved ``__`` names so that dumps of
    normalized problems can be parsed back."""
    tokens = tokenize(text)
    if strict is None:
        strict = bool(tokens) and tokens[0].text == "predicate"
    parser = _Parser(tokens, Signature(), strict, allow_synthetic)
    parser.parse_decls()
    sentence = parser.parse_formula()
    fv = free_vars(sentence)
    if fv:
        raise SemanticError(f"sentence has free variable(s): {', '.join(sorted(fv))}")
    constraints = []
    while parser.at("constraint"):
        parser.next()
        constraints.append(parser.parse_cardexpr())
    problem = Problem(parser.signature, sentence,
                      card_conjoin(constraints) if constraints else CARD_TRUE)
    while parser.at("weight") or parser.at("profileweight"):
        head = parser.next()
        if head.text == "weight":
            tok = parser.peek()
            name = parser.parse_pred_name(declare=False)
            if name not in parser.signature:
                parser.fail(f"weight for undeclared predicate {name}", tok)
            if name in problem.symmetric_weights:
                parser.fail(f"duplicate weight for predicate {name}", tok)
            w1 = parser.parse_number()
            w0 = parser.parse_number()
            problem.symmetric_weights[name] = (w1, w0)
        else:
            if problem.profile_weight is not None:
                parser.fail("duplicate profileweight declaration", head)
            problem.profile_weight = parser.parse_wexpr()
    tok = parser.peek()
    if tok.kind != "eof":
        parser.fail(f"unexpected trailing input {tok.text!r}", tok)
    return problem


def parse_formula(text: str, signature: Signature | None = None,
                  strict: bool = False) -> Formula:
    """Parse a bare formula (used by tests and inline CLI input)."""
    parser = _Parser(tokenize(text), signature if signature is not None else Signature(),
                     strict)
    out = parser.parse_formula()
    tok = parser.peek()
    if tok.kind != "eof":
        parser.fail(f"unexpected trailing input {tok.text!r}", tok)
    return out


def parse_cardinality(text: str, signature: Signature) -> CardConstraint:
    """Parse a bare cardinality expression against an existing signature
    (used for --query style command line arguments)."""
    parser = _Parser(tokenize(text), signature, strict=True, allow_synthetic=False)
    out = parser.parse_cardexpr()
    tok = parser.peek()
    if tok.kind != "eof":
        parser.fail(f"unexpected trailing input {tok.text!r}", tok)
    return out


def parse_weight_expr(text: str, signature: Signature) -> WeightExpr:
    """Parse a bare profile-weight expression against an existing
    signature (used for --weight command line arguments)."""
    parser = _Parser(tokenize(text), signature, strict=True, allow_synthetic=False)
    out = parser.parse_wexpr()
    tok = parser.peek()
    if tok.kind != "eof":
        parser.fail(f"unexpected trailing input {tok.text!r}", tok)
    return out


def format_problem(problem: Problem, include_synthetic: bool = True) -> str:
    """Render a problem back into the input format (the inverse of
    ``parse_problem`` up to whitespace)."""
    lines = []
    for name in problem.signature.predicates():
        if not include_synthetic and name in problem.signature.synthetic:
            continue
        lines.append(f"predicate {name}/{problem.signature.arity(name)}")
    lines.append(str(problem.sentence))
    if problem.constraint != CARD_TRUE:
        if isinstance(problem.constraint, CardAnd):
            for part in problem.constraint.parts:
                lines.append(f"constraint {part}")
        else:
            lines.append(f"constraint {problem.constraint}")
    for name, (w1, w0) in sorted(problem.symmetric_weights.items()):
        from .logic import decimal_str
        lines.append(f"weight {name} {decimal_str(w1)} {decimal_str(w0)}")
    if problem.profile_weight is not None:
        lines.append(f"profileweight {problem.profile_weight}")
    return "\n".join(lines) + "\n"
