"""BeliefBase service: belief storage, rule queries and per-sensor uniqueness."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import structlog

from ..lib.asl_parser import And, ContextFormula, Literal, Not, Relation, Rule, Truth, parse_term
from ..lib.asl_parser import AslSyntaxError
from ..lib.terms import (
    Atom,
    EvaluationError,
    Structure,
    Substitution,
    Term,
    Variable,
    apply,
    eval_relation,
    fresh_suffix,
    functor_of,
    is_ground,
    iter_variables,
    merge_annots,
    annotations,
    rename_variables,
    strip_annots,
    unify,
    unify_annotations,
    with_annots,
)


logger = structlog.get_logger(__name__)

DEFAULT_MAX_DEPTH = 256


class BeliefBaseError(Exception):
    """Base error for belief base operations."""


class NonGroundBeliefError(BeliefBaseError):
    """Raised when a belief with unbound variables is added."""


class ResolutionDepthError(BeliefBaseError):
    """Raised when rule resolution nests deeper than the configured cap."""


class ChangeKind(str, Enum):
    ADD = "+"
    DELETE = "-"


@dataclass(frozen=True)
class BeliefChange:
    """One belief-base mutation, turned into a `+b` or `-b` event by the engine."""
    kind: ChangeKind
    belief: Term

    def __str__(self) -> str:
        return f"{self.kind.value}{self.belief}"


@dataclass(frozen=True)
class UniquenessPattern:
    """At most one stored belief per (functor, arity, key-argument values)."""
    functor: str
    arity: int
    key_positions: FrozenSet[int]
    text: str = ""

    def __post_init__(self) -> None:
        if not self.key_positions:
            raise BeliefBaseError(f"uniqueness pattern '{self.text}' has no key positions")
        if any(pos < 0 or pos >= self.arity for pos in self.key_positions):
            raise BeliefBaseError(f"uniqueness pattern '{self.text}' has key positions outside its arity")

    @classmethod
    def parse(cls, text: str) -> "UniquenessPattern":
        """Build from text like `light(port,_)`: every non-`_` argument is a key."""
        try:
            term = parse_term(text)
        except AslSyntaxError as e:
            raise BeliefBaseError(f"invalid uniqueness pattern '{text}': {e}") from e
        if not isinstance(term, Structure):
            raise BeliefBaseError(f"uniqueness pattern '{text}' must have arguments")
        keys = frozenset(
            index for index, arg in enumerate(term.args)
            if not (isinstance(arg, Variable) and arg.anonymous)
        )
        return cls(term.functor, term.arity, keys, text)

    def matches(self, belief: Term) -> bool:
        return functor_of(belief) == (self.functor, self.arity)

    def key(self, belief: Term) -> Tuple[Term, ...]:
        assert isinstance(belief, Structure)
        return tuple(strip_annots(belief.args[pos]) for pos in sorted(self.key_positions))


def rename_formula(formula: ContextFormula, suffix: str, mapping: Dict[str, str]) -> ContextFormula:
    """Rename every named variable in a context formula consistently."""
    if isinstance(formula, Literal):
        return Literal(rename_variables(formula.term, suffix, mapping))
    if isinstance(formula, Relation):
        return Relation(
            formula.op,
            rename_variables(formula.left, suffix, mapping),
            rename_variables(formula.right, suffix, mapping),
        )
    if isinstance(formula, Not):
        return Not(rename_formula(formula.formula, suffix, mapping))
    if isinstance(formula, And):
        return And(tuple(rename_formula(part, suffix, mapping) for part in formula.parts))
    return formula


def formula_variables(formula: ContextFormula) -> Iterator[Variable]:
    if isinstance(formula, Literal):
        yield from iter_variables(formula.term)
    elif isinstance(formula, Relation):
        yield from iter_variables(formula.left)
        yield from iter_variables(formula.right)
    elif isinstance(formula, Not):
        yield from formula_variables(formula.formula)
    elif isinstance(formula, And):
        for part in formula.parts:
            yield from formula_variables(part)


class BeliefBase:
    """Ordered belief store answering queries through beliefs then rules."""

    def __init__(
        self,
        rules: Iterable[Rule] = (),
        uniqueness_patterns: Iterable[UniquenessPattern] = (),
        max_depth: int = DEFAULT_MAX_DEPTH,
    ):
        self._beliefs: List[Term] = []
        self.rules: List[Rule] = list(rules)
        self.uniqueness_patterns: List[UniquenessPattern] = list(uniqueness_patterns)
        self.max_depth = max_depth

    @classmethod
    def from_pattern_texts(cls, rules: Iterable[Rule], patterns: Sequence[str], **kwargs) -> "BeliefBase":
        return cls(rules, [UniquenessPattern.parse(text) for text in patterns], **kwargs)

    @property
    def beliefs(self) -> Tuple[Term, ...]:
        return tuple(self._beliefs)

    def __len__(self) -> int:
        return len(self._beliefs)

    def __contains__(self, belief: Term) -> bool:
        return self._index_of(belief) is not None

    def _index_of(self, belief: Term) -> Optional[int]:
        plain = strip_annots(belief)
        for index, stored in enumerate(self._beliefs):
            if strip_annots(stored) == plain:
                return index
        return None

    # mutation

    def add_belief(self, belief: Term) -> List[BeliefChange]:
        """Insert a ground belief, enforcing uniqueness patterns.

        Returns the changes made: [] when the belief was already present,
        [add] for a fresh belief, [delete(old), add(new)] when a uniqueness
        pattern displaced an older belief with the same key.
        """
        if not is_ground(belief):
            raise NonGroundBeliefError(f"cannot add non-ground belief {belief}")
        if not isinstance(belief, (Atom, Structure)):
            raise BeliefBaseError(f"belief must be an atom or structure, got {belief}")

        existing = self._index_of(belief)
        if existing is not None:
            stored = self._beliefs[existing]
            self._beliefs[existing] = with_annots(stored, merge_annots(annotations(stored), annotations(belief)))
            return []

        changes: List[BeliefChange] = []
        for pattern in self.uniqueness_patterns:
            if not pattern.matches(belief):
                continue
            key = pattern.key(belief)
            for index, stored in enumerate(self._beliefs):
                if pattern.matches(stored) and pattern.key(stored) == key:
                    del self._beliefs[index]
                    changes.append(BeliefChange(ChangeKind.DELETE, stored))
                    break

        self._beliefs.append(belief)
        changes.append(BeliefChange(ChangeKind.ADD, belief))
        return changes

    def remove_belief(self, pattern: Term, s: Optional[Substitution] = None) -> Optional[Tuple[Term, Substitution]]:
        """Remove the first belief unifying with pattern; return it with the extended substitution."""
        s = s or {}
        for index, stored in enumerate(self._beliefs):
            extended = unify(pattern, stored, s)
            if extended is None:
                continue
            extended = unify_annotations(pattern, stored, extended)
            if extended is None:
                continue
            del self._beliefs[index]
            return stored, extended
        return None

    def replace_belief(self, belief: Term) -> List[BeliefChange]:
        """Atomic `-+b`: drop the first belief with b's functor and arity, then add b."""
        changes: List[BeliefChange] = []
        key = functor_of(belief)
        for index, stored in enumerate(self._beliefs):
            if functor_of(stored) == key:
                del self._beliefs[index]
                changes.append(BeliefChange(ChangeKind.DELETE, stored))
                break
        changes.extend(self.add_belief(belief))
        return changes

    def abolish_changes(self, pattern: Term) -> List[BeliefChange]:
        """Remove every belief unifying with pattern and report each removal."""
        kept: List[Term] = []
        removed: List[BeliefChange] = []
        for stored in self._beliefs:
            if unify(pattern, stored, {}) is not None:
                removed.append(BeliefChange(ChangeKind.DELETE, stored))
            else:
                kept.append(stored)
        self._beliefs = kept
        return removed

    def abolish(self, pattern: Term) -> int:
        return len(self.abolish_changes(pattern))

    # queries

    def query(self, goal: ContextFormula, s: Optional[Substitution] = None) -> Iterator[Substitution]:
        """Depth-first answers for goal: beliefs first, then rules in declaration order."""
        yield from self._solve(goal, dict(s or {}), 0)

    def query_literal(self, term: Term, s: Optional[Substitution] = None) -> Iterator[Substitution]:
        yield from self.query(Literal(term), s)

    def holds(self, goal: ContextFormula, s: Optional[Substitution] = None) -> bool:
        for _ in self.query(goal, s):
            return True
        return False

    def _solve(self, goal: ContextFormula, s: Substitution, depth: int) -> Iterator[Substitution]:
        if depth > self.max_depth:
            raise ResolutionDepthError(f"rule resolution exceeded depth {self.max_depth}")

        if isinstance(goal, Truth):
            yield s
        elif isinstance(goal, Literal):
            yield from self._solve_literal(goal.term, s, depth)
        elif isinstance(goal, And):
            yield from self._solve_conjunction(goal.parts, s, depth)
        elif isinstance(goal, Not):
            unbound = [
                var.name for var in formula_variables(goal.formula)
                if not var.anonymous and isinstance(apply(var, s), Variable)
            ]
            if unbound:
                raise EvaluationError(f"negation over unbound variable(s) {', '.join(unbound)}")
            for _ in self._solve(goal.formula, s, depth + 1):
                return
            yield s
        elif isinstance(goal, Relation):
            result = eval_relation(goal.op, goal.left, goal.right, s)
            if result is not None:
                yield result
        else:
            raise BeliefBaseError(f"cannot query {goal!r}")

    def _solve_conjunction(self, parts: Sequence[ContextFormula], s: Substitution, depth: int) -> Iterator[Substitution]:
        if not parts:
            yield s
            return
        for partial in self._solve(parts[0], s, depth):
            yield from self._solve_conjunction(parts[1:], partial, depth)

    def _solve_literal(self, term: Term, s: Substitution, depth: int) -> Iterator[Substitution]:
        for stored in list(self._beliefs):
            extended = unify(term, stored, s)
            if extended is None:
                continue
            extended = unify_annotations(term, stored, extended)
            if extended is not None:
                yield extended

        key = functor_of(term)
        for rule in self.rules:
            if functor_of(rule.head) != key:
                continue
            mapping: Dict[str, str] = {}
            suffix = fresh_suffix()
            head = rename_variables(rule.head, suffix, mapping)
            extended = unify(term, head, s)
            if extended is None:
                continue
            yield from self._solve(rename_formula(rule.body, suffix, mapping), extended, depth + 1)

    # inspection

    def beliefs_matching(self, functor: str, arity: int) -> List[Term]:
        return [b for b in self._beliefs if functor_of(b) == (functor, arity)]

    def uniqueness_violations(self) -> List[str]:
        """Describe every pattern/key pair held by more than one belief."""
        violations: List[str] = []
        for pattern in self.uniqueness_patterns:
            seen: Dict[Tuple[Term, ...], int] = {}
            for stored in self._beliefs:
                if pattern.matches(stored):
                    key = pattern.key(stored)
                    seen[key] = seen.get(key, 0) + 1
            for key, count in seen.items():
                if count > 1:
                    keys = ",".join(str(k) for k in key)
                    violations.append(f"{pattern.text or pattern.functor}: {count} beliefs for key ({keys})")
        if violations:
            logger.warning("Uniqueness violated", violations=violations)
        return violations

    def snapshot(self) -> List[str]:
        return [str(b) for b in self._beliefs]
