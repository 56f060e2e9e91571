"""Formula AST, signatures, cardinality constraints and weight expressions.

The language is the two-variable fragment with equality: the only terms
are the variables ``x`` and ``y``, predicates have arity 1 or 2, equality
is built in, and quantifiers may carry an exact/at-most/at-least count.
All AST nodes are immutable; every operation on them is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from .errors import SemanticError

VARIABLES = ("x", "y")

#: name prefix reserved for predicates introduced during normalization
SYNTHETIC_PREFIX = "__"


def other_variable(var: str) -> str:
    return "y" if var == "x" else "x"


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    pred: str
    args: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Counting(Formula):
    """A counting quantifier: exactly / at most / at least ``count``
    witnesses of ``var`` satisfy ``body``.  ``cmp`` is '=', '<=' or '>='."""

    cmp: str
    count: int
    var: str
    body: Formula


TRUE = Eq("x", "x")
FALSE = Not(TRUE)


def conjoin(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disjoin(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def conjuncts(formula: Formula) -> Iterator[Formula]:
    """Yield the conjuncts of a (possibly nested) top level conjunction."""
    if isinstance(formula, And):
        yield from conjuncts(formula.left)
        yield from conjuncts(formula.right)
    else:
        yield formula


def free_vars(formula: Formula) -> frozenset[str]:
    if isinstance(formula, Atom):
        return frozenset(formula.args)
    if isinstance(formula, Eq):
        return frozenset((formula.left, formula.right))
    if isinstance(formula, Not):
        return free_vars(formula.sub)
    if isinstance(formula, (And, Or, Implies, Iff)):
        return free_vars(formula.left) | free_vars(formula.right)
    if isinstance(formula, (Forall, Exists, Counting)):
        return free_vars(formula.body) - {formula.var}
    raise TypeError(f"not a formula: {formula!r}")


def substitute(formula: Formula, mapping: Mapping[str, str]) -> Formula:
    """Simultaneously rename free variables.  Quantified variables are
    never renamed; the parser guarantees no rebinding, so capture cannot
    occur for the swaps and merges used here."""
    if isinstance(formula, Atom):
        return Atom(formula.pred, tuple(mapping.get(a, a) for a in formula.args))
    if isinstance(formula, Eq):
        return Eq(mapping.get(formula.left, formula.left),
                  mapping.get(formula.right, formula.right))
    if isinstance(formula, Not):
        return Not(substitute(formula.sub, mapping))
    if isinstance(formula, (And, Or, Implies, Iff)):
        return type(formula)(substitute(formula.left, mapping),
                             substitute(formula.right, mapping))
    if isinstance(formula, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != formula.var}
        return type(formula)(formula.var, substitute(formula.body, inner))
    if isinstance(formula, Counting):
        inner = {k: v for k, v in mapping.items() if k != formula.var}
        return Counting(formula.cmp, formula.count, formula.var,
                        substitute(formula.body, inner))
    raise TypeError(f"not a formula: {formula!r}")


def is_quantifier_free(formula: Formula) -> bool:
    if isinstance(formula, (Atom, Eq)):
        return True
    if isinstance(formula, Not):
        return is_quantifier_free(formula.sub)
    if isinstance(formula, (And, Or, Implies, Iff)):
        return is_quantifier_free(formula.left) and is_quantifier_free(formula.right)
    return False


def atoms_of(formula: Formula) -> Iterator[Atom]:
    if isinstance(formula, Atom):
        yield formula
    elif isinstance(formula, Eq):
        return
    elif isinstance(formula, Not):
        yield from atoms_of(formula.sub)
    elif isinstance(formula, (And, Or, Implies, Iff)):
        yield from atoms_of(formula.left)
        yield from atoms_of(formula.right)
    elif isinstance(formula, (Forall, Exists, Counting)):
        yield from atoms_of(formula.body)


# ---------------------------------------------------------------------------
# Signatures


@dataclass
class Signature:
    """Predicate declarations.  Synthetic predicates are the auxiliaries
    introduced by normalization; user input may never mention them."""

    arities: dict[str, int] = field(default_factory=dict)
    synthetic: set[str] = field(default_factory=set)

    def declare(self, name: str, arity: int, synthetic: bool = False) -> None:
        if arity not in (1, 2):
            raise SemanticError(f"predicate {name} must have arity 1 or 2, got {arity}")
        if name in self.arities:
            if self.arities[name] != arity:
                raise SemanticError(f"predicate {name} redeclared with arity "
                                    f"{arity} (was {self.arities[name]})")
            return
        if name in VARIABLES:
            raise SemanticError(f"{name!r} is a reserved variable name")
        self.arities[name] = arity
        if synthetic:
            self.synthetic.add(name)

    def arity(self, name: str) -> int:
        try:
            return self.arities[name]
        except KeyError:
            raise SemanticError(f"undeclared predicate {name}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.arities

    def predicates(self) -> list[str]:
        return sorted(self.arities)

    def unary_predicates(self) -> list[str]:
        return sorted(p for p, a in self.arities.items() if a == 1)

    def binary_predicates(self) -> list[str]:
        return sorted(p for p, a in self.arities.items() if a == 2)

    def user_predicates(self) -> list[str]:
        return sorted(p for p in self.arities if p not in self.synthetic)

    def copy(self) -> "Signature":
        return Signature(dict(self.arities), set(self.synthetic))

    def ground_atom_count(self, n: int) -> int:
        return sum(n ** a for a in self.arities.values())


def one_type_slots(signature: Signature) -> list[tuple[str, str]]:
    """The single-variable atom slots in canonical order: unary predicates
    by name, then reflexive binary atoms by name.  Slot 0 is the most
    significant bit of a 1-type index."""
    return ([(p, "unary") for p in signature.unary_predicates()]
            + [(p, "reflexive") for p in signature.binary_predicates()])


def two_table_slots(signature: Signature) -> list[tuple[str, str]]:
    """The two-variable atom slots: for each binary predicate (by name),
    the (x,y) atom then the (y,x) atom.  Slot 0 is the most significant
    bit of a 2-table index."""
    out = []
    for p in signature.binary_predicates():
        out.append((p, "xy"))
        out.append((p, "yx"))
    return out


def slot_bit(index: int, slot: int, width: int) -> int:
    """Big-endian slot access: slot 0 is the highest bit."""
    return (index >> (width - 1 - slot)) & 1


# ---------------------------------------------------------------------------
# Cardinality constraints


@dataclass(frozen=True)
class LinearExpr:
    """Integer-linear expression over predicate cardinalities: a constant
    plus a sum of ``coefficient * |P|`` terms (coeffs sorted by name)."""

    coeffs: tuple[tuple[str, int], ...] = ()
    const: int = 0

    @staticmethod
    def of(const: int = 0, **preds: int) -> "LinearExpr":
        return LinearExpr(tuple(sorted(preds.items())), const)

    @staticmethod
    def card(pred: str, coefficient: int = 1) -> "LinearExpr":
        return LinearExpr(((pred, coefficient),), 0)

    def evaluate(self, cards: Mapping[str, int]) -> int:
        return self.const + sum(c * cards[p] for p, c in self.coeffs)

    def predicates(self) -> frozenset[str]:
        return frozenset(p for p, _ in self.coeffs)

    def __str__(self) -> str:
        parts = []
        for pred, c in self.coeffs:
            term = f"|{pred}|" if abs(c) == 1 else f"{abs(c)}*|{pred}|"
            parts.append(("-" if c < 0 else "+", term))
        if self.const or not parts:
            parts.append(("-" if self.const < 0 else "+", str(abs(self.const))))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, term in parts[1:]:
            out += f" {sign} {term}"
        return out


class CardConstraint:
    """Boolean combination of comparisons between linear expressions."""

    __slots__ = ()

    def __str__(self) -> str:
        return format_constraint(self)


@dataclass(frozen=True)
class CardCompare(CardConstraint):
    op: str  # one of = <= >= < >
    left: LinearExpr
    right: LinearExpr

    def holds(self, cards: Mapping[str, int]) -> bool:
        a = self.left.evaluate(cards)
        b = self.right.evaluate(cards)
        return {"=": a == b, "<=": a <= b, ">=": a >= b,
                "<": a < b, ">": a > b}[self.op]


@dataclass(frozen=True)
class CardAnd(CardConstraint):
    parts: tuple[CardConstraint, ...]

    def holds(self, cards: Mapping[str, int]) -> bool:
        return all(p.holds(cards) for p in self.parts)


@dataclass(frozen=True)
class CardOr(CardConstraint):
    parts: tuple[CardConstraint, ...]

    def holds(self, cards: Mapping[str, int]) -> bool:
        return any(p.holds(cards) for p in self.parts)


@dataclass(frozen=True)
class CardNot(CardConstraint):
    sub: CardConstraint

    def holds(self, cards: Mapping[str, int]) -> bool:
        return not self.sub.holds(cards)


CARD_TRUE = CardAnd(())


def card_conjoin(parts) -> CardConstraint:
    flat: list[CardConstraint] = []
    for p in parts:
        if isinstance(p, CardAnd):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return CardAnd(tuple(flat))


def constraint_predicates(constraint: CardConstraint) -> frozenset[str]:
    if isinstance(constraint, CardCompare):
        return constraint.left.predicates() | constraint.right.predicates()
    if isinstance(constraint, (CardAnd, CardOr)):
        out: frozenset[str] = frozenset()
        for p in constraint.parts:
            out |= constraint_predicates(p)
        return out
    if isinstance(constraint, CardNot):
        return constraint_predicates(constraint.sub)
    raise TypeError(f"not a constraint: {constraint!r}")


# ---------------------------------------------------------------------------
# Weight expressions over cardinality counters


class WeightExpr:
    """Arithmetic over ``|P|`` counters, evaluated per profile.  Exponents
    must be integers; bases may be arbitrary rationals (so ``(-1)^|P|``
    works).  Evaluation is exact."""

    __slots__ = ()

    def __str__(self) -> str:
        return format_weight(self)


@dataclass(frozen=True)
class WNum(WeightExpr):
    value: Fraction


@dataclass(frozen=True)
class WCard(WeightExpr):
    pred: str


@dataclass(frozen=True)
class WNeg(WeightExpr):
    sub: WeightExpr


@dataclass(frozen=True)
class WAdd(WeightExpr):
    left: WeightExpr
    right: WeightExpr


@dataclass(frozen=True)
class WSub(WeightExpr):
    left: WeightExpr
    right: WeightExpr


@dataclass(frozen=True)
class WMul(WeightExpr):
    left: WeightExpr
    right: WeightExpr


@dataclass(frozen=True)
class WPow(WeightExpr):
    base: WeightExpr
    exponent: WeightExpr


def weight_value(expr: WeightExpr, cards: Mapping[str, int]) -> Fraction:
    if isinstance(expr, WNum):
        return expr.value
    if isinstance(expr, WCard):
        return Fraction(cards[expr.pred])
    if isinstance(expr, WNeg):
        return -weight_value(expr.sub, cards)
    if isinstance(expr, WAdd):
        return weight_value(expr.left, cards) + weight_value(expr.right, cards)
    if isinstance(expr, WSub):
        return weight_value(expr.left, cards) - weight_value(expr.right, cards)
    if isinstance(expr, WMul):
        return weight_value(expr.left, cards) * weight_value(expr.right, cards)
    if isinstance(expr, WPow):
        base = weight_value(expr.base, cards)
        exp = weight_value(expr.exponent, cards)
        if exp.denominator != 1:
            raise SemanticError(f"non-integer exponent {exp} in weight expression")
        if base == 0 and exp < 0:
            raise SemanticError("0 raised to a negative exponent in weight expression")
        return base ** int(exp)
    raise TypeError(f"not a weight expression: {expr!r}")


def weight_predicates(expr: WeightExpr) -> frozenset[str]:
    if isinstance(expr, WNum):
        return frozenset()
    if isinstance(expr, WCard):
        return frozenset((expr.pred,))
    if isinstance(expr, WNeg):
        return weight_predicates(expr.sub)
    if isinstance(expr, (WAdd, WSub, WMul, WPow)):
        left = expr.base if isinstance(expr, WPow) else expr.left
        right = expr.exponent if isinstance(expr, WPow) else expr.right
        return weight_predicates(left) | weight_predicates(right)
    raise TypeError(f"not a weight expression: {expr!r}")


# ---------------------------------------------------------------------------
# Pretty printing (inverse of the parser, used by --dump-normalized)

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5}


def format_formula(f: Formula, parent_prec: int = 0) -> str:
    if isinstance(f, Atom):
        return f"{f.pred}({', '.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        if isinstance(f.sub, Eq):
            return f"{f.sub.left} != {f.sub.right}"
        return "!" + format_formula(f.sub, _PREC[Not])
    if isinstance(f, (And, Or, Implies, Iff)):
        prec = _PREC[type(f)]
        op = {And: "&", Or: "|", Implies: "->", Iff: "<->"}[type(f)]
        # -> is right-associative, the rest chain to the left
        lp = prec if isinstance(f, Implies) else prec - 1
        rp = prec - 1 if isinstance(f, Implies) else prec
        text = (f"{format_formula(f.left, lp)} {op} "
                f"{format_formula(f.right, rp)}")
        return f"({text})" if prec <= parent_prec else text
    if isinstance(f, Forall):
        return f"forall {f.var} ({format_formula(f.body)})"
    if isinstance(f, Exists):
        return f"exists {f.var} ({format_formula(f.body)})"
    if isinstance(f, Counting):
        return (f"exists{{{f.cmp}{f.count}}} {f.var} "
                f"({format_formula(f.body)})")
    raise TypeError(f"not a formula: {f!r}")


def format_constraint(c: CardConstraint) -> str:
    if isinstance(c, CardCompare):
        return f"{c.left} {c.op} {c.right}"
    if isinstance(c, CardAnd):
        if not c.parts:
            return "0 = 0"
        return " and ".join(f"({format_constraint(p)})" for p in c.parts)
    if isinstance(c, CardOr):
        if not c.parts:
            return "0 = 1"
        return " or ".join(f"({format_constraint(p)})" for p in c.parts)
    if isinstance(c, CardNot):
        return f"not ({format_constraint(c.sub)})"
    raise TypeError(f"not a constraint: {c!r}")


def decimal_str(v: Fraction) -> str:
    """Exact decimal rendering; falls back to p/q when the denominator
    has a prime factor other than 2 and 5."""
    if v.denominator == 1:
        return str(v.numerator)
    den = v.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{v.numerator}/{v.denominator}"
    shift = max(twos, fives)
    scaled = abs(v.numerator) * 10 ** shift // v.denominator
    digits = str(scaled).rjust(shift + 1, "0")
    sign = "-" if v < 0 else ""
    return f"{sign}{digits[:-shift]}.{digits[-shift:]}"


def format_weight(w: WeightExpr) -> str:
    if isinstance(w, WNum):
        return decimal_str(w.value)
    if isinstance(w, WCard):
        return f"|{w.pred}|"
    if isinstance(w, WNeg):
        return f"-({format_weight(w.sub)})"
    if isinstance(w, WAdd):
        return f"({format_weight(w.left)} + {format_weight(w.right)})"
    if isinstance(w, WSub):
        return f"({format_weight(w.left)} - {format_weight(w.right)})"
    if isinstance(w, WMul):
        return f"({format_weight(w.left)} * {format_weight(w.right)})"
    if isinstance(w, WPow):
        return f"({format_weight(w.base)})^({format_weight(w.exponent)})"
    raise TypeError(f"not a weight expression: {w!r}")
