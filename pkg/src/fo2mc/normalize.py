"""Rewrites a parsed sentence into the engine's canonical form.

The pipeline: single-variable counting quantifiers become cardinality
constraints on fresh unary predicates; remaining at-most/at-least
counting quantifiers are expanded into exact ones; each two-variable
``exactly-m`` occurrence is encoded with a fresh unary predicate, m fresh
binary successor predicates, their axioms and a per-block maximization
directive; the result is brought to Scott normal form (one universal
matrix plus forall-exists conjuncts), and finally each exists-conjunct is
folded into the matrix through a fresh sign predicate that drives the
inclusion-exclusion sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import SemanticError, UnsupportedFeatureError
from .logic import (And, Atom, CARD_TRUE, CardAnd, CardCompare,
                    CardConstraint, Counting, Eq, Exists, Forall, Formula,
                    Iff, Implies, LinearExpr, Not, Or, Signature, card_conjoin,
                    conjoin, disjoin, free_vars, is_quantifier_free,
                    other_variable, substitute)
from .parser import Problem


class NameAllocator:
    """Deterministic fresh names: __P{l} for sign predicates, __A{i} and
    __f{i}_{j} for counting blocks, __R{i} for definitional guards and
    __D{t} for Scott-reduction definitional predicates."""

    def __init__(self, signature: Signature):
        self.signature = signature
        self.counters = {"P": 0, "A": 0, "f": 0, "R": 0, "D": 0}

    def _next(self, kind: str) -> int:
        self.counters[kind] += 1
        return self.counters[kind]

    def fresh_sign(self) -> str:
        name = f"__P{self._next('P')}"
        self.signature.declare(name, 1, synthetic=True)
        return name

    def fresh_a(self) -> str:
        name = f"__A{self._next('A')}"
        self.signature.declare(name, 1, synthetic=True)
        return name

    def fresh_fs(self, block_index: int, m: int) -> tuple[str, ...]:
        names = tuple(f"__f{block_index}_{j}" for j in range(1, m + 1))
        for name in names:
            self.signature.declare(name, 2, synthetic=True)
        return names

    def fresh_guard(self) -> str:
        name = f"__R{self._next('R')}"
        self.signature.declare(name, 2, synthetic=True)
        return name

    def fresh_def(self, arity: int) -> str:
        name = f"__D{self._next('D')}"
        self.signature.declare(name, arity, synthetic=True)
        return name


@dataclass(frozen=True)
class CountingBlock:
    """The encoding of one ``exactly-m successors`` occurrence."""

    index: int
    guard: str
    m: int
    a_pred: str
    f_preds: tuple[str, ...]

    @property
    def divisor_base(self) -> int:
        return math.factorial(self.m)


@dataclass
class NormalizedProblem:
    signature: Signature
    matrix: tuple[Formula, ...]
    sign_preds: tuple[str, ...]
    blocks: tuple[CountingBlock, ...]
    #: user constraint plus |A| = m constraints from single-variable counting
    constraint: CardConstraint = CARD_TRUE
    symmetric_weights: dict = field(default_factory=dict)
    profile_weight: object = None

    @property
    def maximize(self) -> tuple[tuple[str, ...], ...]:
        return tuple((b.a_pred, *b.f_preds) for b in self.blocks)

    def tie_constraint(self) -> CardConstraint:
        """The induced |f_ij| = |A_i| ties of all counting blocks."""
        ties = []
        for b in self.blocks:
            for f in b.f_preds:
                ties.append(CardCompare("=", LinearExpr.card(f),
                                        LinearExpr.card(b.a_pred)))
        return card_conjoin(ties) if ties else CARD_TRUE

    def merged_constraint(self) -> CardConstraint:
        parts = []
        if self.constraint != CARD_TRUE:
            parts.append(self.constraint)
        tie = self.tie_constraint()
        if tie != CARD_TRUE:
            parts.append(tie)
        return card_conjoin(parts) if parts else CARD_TRUE

    def matrix_formula(self) -> Formula:
        return conjoin(self.matrix)


# ---------------------------------------------------------------------------
# Step 1: single-variable counting quantifiers -> cardinality constraints


def _distribute(sentence: Formula) -> list[Formula]:
    """Split into conjuncts, distributing universal quantifiers over
    conjunctions and dropping vacuous ones (the domain is never empty)."""
    if isinstance(sentence, And):
        return _distribute(sentence.left) + _distribute(sentence.right)
    if isinstance(sentence, Forall):
        parts = _distribute(sentence.body)
        return [Forall(sentence.var, p) if sentence.var in free_vars(p) else p
                for p in parts]
    return [sentence]


def extract_single_var_counting(sentence: Formula, alloc: NameAllocator
                                ) -> tuple[Formula, list[CardConstraint], list[Formula]]:
    """Replace top-level conjuncts of the form ``exists{cmp m} v (body(v))``
    by a constraint ``|A| cmp m`` with a fresh defining predicate A."""
    kept: list[Formula] = []
    constraints: list[CardConstraint] = []
    definitions: list[Formula] = []
    for part in _distribute(sentence):
        if (isinstance(part, Counting)
                and free_vars(part.body) <= {part.var}):
            a = alloc.fresh_a()
            v = part.var
            definitions.append(Forall(v, Iff(Atom(a, (v,)), part.body)))
            constraints.append(CardCompare(part.cmp, LinearExpr.card(a),
                                           LinearExpr.of(part.count)))
        else:
            kept.append(part)
    return conjoin(kept) if kept else Forall("x", Eq("x", "x")), constraints, definitions


# ---------------------------------------------------------------------------
# Step 2: expand <= / >= counting quantifiers into exact ones


def expand_counting_sugar(formula: Formula) -> Formula:
    """Rewrite so that only ``exists{=m}`` with m >= 1 remains: at-most
    becomes a disjunction of exact counts, at-least the negation of an
    at-most, and ``exists{=0}`` a universal negation."""
    if isinstance(formula, (Atom, Eq)):
        return formula
    if isinstance(formula, Not):
        return Not(expand_counting_sugar(formula.sub))
    if isinstance(formula, (And, Or, Implies, Iff)):
        return type(formula)(expand_counting_sugar(formula.left),
                             expand_counting_sugar(formula.right))
    if isinstance(formula, (Forall, Exists)):
        return type(formula)(formula.var, expand_counting_sugar(formula.body))
    if isinstance(formula, Counting):
        body = expand_counting_sugar(formula.body)
        v, m = formula.var, formula.count
        if formula.cmp == "=":
            if m == 0:
                return Forall(v, Not(body))
            return Counting("=", m, v, body)
        if formula.cmp == "<=":
            return disjoin(expand_counting_sugar(Counting("=", k, v, body))
                           for k in range(m + 1))
        if formula.cmp == ">=":
            if m == 0:
                return Eq(v, v)  # trivially true
            return Not(expand_counting_sugar(Counting("<=", m - 1, v, body)))
    raise TypeError(f"not a formula: {formula!r}")


# ---------------------------------------------------------------------------
# Step 3: encode two-variable exact-counting occurrences


def encode_counting(sentence: Formula, alloc: NameAllocator
                    ) -> tuple[Formula, tuple[CountingBlock, ...]]:
    """Replace every ``exists{=m} v body(w,v)`` occurrence with A_i(w) and
    conjoin the block axioms.  The axioms use the canonical orientation
    (w renamed to x, v to y)."""
    blocks: list[CountingBlock] = []
    axioms: list[Formula] = []

    def walk(f: Formula, inside_counting: bool) -> Formula:
        if isinstance(f, (Atom, Eq)):
            return f
        if isinstance(f, Not):
            return Not(walk(f.sub, inside_counting))
        if isinstance(f, (And, Or, Implies, Iff)):
            return type(f)(walk(f.left, inside_counting),
                           walk(f.right, inside_counting))
        if isinstance(f, (Forall, Exists)):
            return type(f)(f.var, walk(f.body, inside_counting))
        if isinstance(f, Counting):
            if inside_counting:
                raise UnsupportedFeatureError(
                    "nested counting quantifiers are not supported")
            body = walk(f.body, True)
            v = f.var
            w = other_variable(v)
            if free_vars(body) <= {v}:
                raise UnsupportedFeatureError(
                    "a counting quantifier over a single-variable formula is "
                    "only supported as a top-level conjunct")
            if f.count < 1:
                raise SemanticError("exact count must be positive here "
                                    "(sugar expansion removes zero counts)")
            index = len(blocks) + 1
            canon = {w: "x", v: "y"}
            if isinstance(body, Atom) and body.args == (w, v):
                guard = body.pred
            else:
                guard = alloc.fresh_guard()
                axioms.append(Forall("x", Forall("y", Iff(
                    Atom(guard, ("x", "y")), substitute(body, canon)))))
            a = alloc.fresh_a()
            fs = alloc.fresh_fs(index, f.count)
            blocks.append(CountingBlock(index, guard, f.count, a, fs))
            f_atoms = [Atom(name, ("x", "y")) for name in fs]
            axioms.append(Forall("x", Forall("y", Implies(
                Atom(a, ("x",)),
                Iff(Atom(guard, ("x", "y")), disjoin(f_atoms))))))
            for p in range(len(fs)):
                for q in range(p + 1, len(fs)):
                    axioms.append(Forall("x", Forall("y", Implies(
                        f_atoms[p], Not(f_atoms[q])))))
            for fa in f_atoms:
                axioms.append(Forall("x", Exists("y", Implies(
                    Atom(a, ("x",)), fa))))
            return Atom(a, (w,))
        raise TypeError(f"not a formula: {f!r}")

    replaced = walk(sentence, False)
    return conjoin([replaced, *axioms]), tuple(blocks)


# ---------------------------------------------------------------------------
# Step 4: Scott normal form


def _contains_quantifier(f: Formula) -> bool:
    return not is_quantifier_free(f)


def _pull(f: Formula) -> Formula:
    """Pull quantifiers outward through connectives whose other side does
    not mention the bound variable; push negation through quantifiers."""
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        sub = _pull(f.sub)
        if isinstance(sub, Forall):
            return _pull(Exists(sub.var, Not(sub.body)))
        if isinstance(sub, Exists):
            return _pull(Forall(sub.var, Not(sub.body)))
        return Not(sub)
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _pull(f.body))
    if isinstance(f, (And, Or, Implies)):
        left, right = _pull(f.left), _pull(f.right)
        kind = type(f)
        # right side quantified, left side free of its variable
        if isinstance(right, (Forall, Exists)) and right.var not in free_vars(left):
            inner = kind(left, right.body)
            quant = Forall if isinstance(right, Forall) else Exists
            return _pull(quant(right.var, inner))
        if isinstance(left, (Forall, Exists)) and left.var not in free_vars(right):
            if kind is Implies:
                # (forall v b) -> C  ==  exists v (b -> C), and dually
                quant = Exists if isinstance(left, Forall) else Forall
            else:
                quant = Forall if isinstance(left, Forall) else Exists
            return _pull(quant(left.var, kind(left.body, right)))
        if (kind is Or and isinstance(left, Exists) and isinstance(right, Exists)
                and left.var == right.var):
            return _pull(Exists(left.var, Or(left.body, right.body)))
        if (kind is And and isinstance(left, Forall) and isinstance(right, Forall)
                and left.var == right.var):
            return _pull(Forall(left.var, And(left.body, right.body)))
        return kind(left, right)
    if isinstance(f, Iff):
        return Iff(_pull(f.left), _pull(f.right))
    raise TypeError(f"not a formula: {f!r}")


def _strip_prefix(f: Formula) -> tuple[tuple[str, ...], Formula]:
    prefix: list[str] = []
    while isinstance(f, Forall):
        prefix.append(f.var)
        f = f.body
    return tuple(dict.fromkeys(prefix)), f


def _innermost_quantified(f: Formula, in_scope: tuple[str, ...]
                          ) -> tuple[Formula, tuple[str, ...]] | None:
    """Find a quantified subformula whose body is quantifier-free,
    together with the variables bound around its position."""
    if isinstance(f, (Atom, Eq)):
        return None
    if isinstance(f, Not):
        return _innermost_quantified(f.sub, in_scope)
    if isinstance(f, (And, Or, Implies, Iff)):
        return (_innermost_quantified(f.left, in_scope)
                or _innermost_quantified(f.right, in_scope))
    if isinstance(f, (Forall, Exists)):
        deeper = _innermost_quantified(f.body, in_scope + (f.var,))
        if deeper is not None:
            return deeper
        if is_quantifier_free(f.body):
            return f, in_scope
        return None
    raise TypeError(f"not a formula: {f!r}")


def _replace_once(f: Formula, target: Formula, replacement: Formula) -> Formula:
    if f is target:
        return replacement
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(_replace_once(f.sub, target, replacement))
    if isinstance(f, (And, Or, Implies, Iff)):
        left = _replace_once(f.left, target, replacement)
        if left is not f.left:
            return type(f)(left, f.right)
        return type(f)(f.left, _replace_once(f.right, target, replacement))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _replace_once(f.body, target, replacement))
    raise TypeError(f"not a formula: {f!r}")


def to_scott(sentence: Formula, alloc: NameAllocator
             ) -> tuple[list[Formula], list[Formula]]:
    """Reduce to Scott normal form: a list of quantifier-free matrix
    conjuncts plus a list of quantifier-free Psi_i, one per forall-exists
    conjunct (canonicalized so x is the universal variable)."""
    matrix: list[Formula] = []
    psis: list[Formula] = []
    pending = _distribute(sentence)
    while pending:
        conjunct = _pull(pending.pop(0))
        pending_split = _distribute(conjunct)
        if len(pending_split) > 1:
            pending = pending_split + pending
            continue
        prefix, core = _strip_prefix(conjunct)
        if is_quantifier_free(core):
            matrix.append(core)
            continue
        if isinstance(core, Iff) and _contains_quantifier(core):
            rebuilt_a: Formula = Implies(core.left, core.right)
            rebuilt_b: Formula = Implies(core.right, core.left)
            for var in reversed(prefix):
                rebuilt_a = Forall(var, rebuilt_a)
                rebuilt_b = Forall(var, rebuilt_b)
            pending = [rebuilt_a, rebuilt_b] + pending
            continue
        if isinstance(core, Exists) and is_quantifier_free(core.body):
            v = core.var
            w = other_variable(v)
            if set(prefix) <= {w}:
                body = substitute(core.body, {w: "x", v: "y"})
                psis.append(body)
                continue
        # eliminate one innermost quantified subformula definitionally
        found = _innermost_quantified(core, prefix)
        if found is None:
            raise UnsupportedFeatureError(
                f"irreducible quantifier pattern in: {conjunct}")
        sub, scope = found
        v = sub.var
        w = other_variable(v)
        fv = free_vars(sub)
        carrier = next(iter(fv), None)
        if carrier is None:
            # closed subformula: the definitional predicate is constant
            # (its definition does not mention its argument)
            carrier = scope[0] if scope else w
        d = alloc.fresh_def(1)
        d_atom = Atom(d, (carrier,))
        replaced = _replace_once(core, sub, d_atom)
        for var in reversed(prefix):
            replaced = Forall(var, replaced)
        for var in free_vars(replaced):
            replaced = Forall(var, replaced)
        # definition axioms, oriented with the defined variable as x
        def_var = carrier if fv else w
        d_x = Atom(d, (def_var,))
        body = sub.body
        if isinstance(sub, Exists):
            forward = Forall(def_var, Exists(v, Or(Not(d_x), body)))
            backward = Forall(def_var, Forall(v, Implies(body, d_x)))
        else:
            forward = Forall(def_var, Forall(v, Or(Not(d_x), body)))
            backward = Forall(def_var, Exists(v, Or(Not(body), d_x)))
        pending = [replaced, forward, backward] + pending
    return matrix, psis


# ---------------------------------------------------------------------------
# Step 5: sign predicates for the forall-exists conjuncts


def eliminate_existentials(matrix: list[Formula], psis: list[Formula],
                           alloc: NameAllocator
                           ) -> tuple[list[Formula], tuple[str, ...]]:
    """Fold each forall-exists conjunct into the matrix via a fresh sign
    predicate P_l with the conjunct P_l(x) -> !Psi_l(x,y)."""
    out = list(matrix)
    signs = []
    for psi in psis:
        p = alloc.fresh_sign()
        signs.append(p)
        out.append(Implies(Atom(p, ("x",)), Not(psi)))
    return out, tuple(signs)


# ---------------------------------------------------------------------------
# Full pipeline


def normalize(problem: Problem) -> NormalizedProblem:
    signature = problem.signature.copy()
    alloc = NameAllocator(signature)
    sentence, single_constraints, definitions = extract_single_var_counting(
        problem.sentence, alloc)
    sentence = conjoin([sentence, *definitions])
    sentence = expand_counting_sugar(sentence)
    sentence, blocks = encode_counting(sentence, alloc)
    matrix, psis = to_scott(sentence, alloc)
    matrix, signs = eliminate_existentials(matrix, psis, alloc)
    for conjunct in matrix:
        if not is_quantifier_free(conjunct):
            raise UnsupportedFeatureError(f"matrix conjunct not reduced: {conjunct}")
    constraint = card_conjoin([problem.constraint, *single_constraints])
    if isinstance(constraint, CardAnd) and not constraint.parts:
        constraint = CARD_TRUE
    return NormalizedProblem(
        signature=signature,
        matrix=tuple(matrix),
        sign_preds=signs,
        blocks=blocks,
        constraint=constraint,
        symmetric_weights=dict(problem.symmetric_weights),
        profile_weight=problem.profile_weight,
    )


def dump_normalized(norm: NormalizedProblem) -> str:
    """Render the normalized problem in the input grammar (synthetic
    predicates included); maximization directives become comments."""
    lines = []
    for name in norm.signature.predicates():
        mark = "  # synthetic" if name in norm.signature.synthetic else ""
        lines.append(f"predicate {name}/{norm.signature.arity(name)}{mark}")
    body = norm.matrix_formula()
    lines.append(str(Forall("x", Forall("y", body))))
    merged = norm.merged_constraint()
    if merged != CARD_TRUE:
        parts = merged.parts if isinstance(merged, CardAnd) else (merged,)
        for part in parts:
            lines.append(f"constraint {part}")
    for group in norm.maximize:
        lines.append(f"# maximize {' '.join(group)}")
    if norm.sign_preds:
        lines.append(f"# signs {' '.join(norm.sign_preds)}")
    return "\n".join(lines) + "\n"
