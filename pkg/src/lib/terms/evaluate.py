"""Arithmetic and relational evaluation over terms."""

from __future__ import annotations

from typing import Mapping, Optional

from .core import Number, Structure, Term, TermError, Variable, strip_annots
from .unify import Substitution, apply, unify, walk


RELATIONAL_OPERATORS = ("<", "<=", ">", ">=", "==", "\\==", "=")
ORDERING_OPERATORS = ("<", "<=", ">", ">=")


class EvaluationError(TermError):
    """Raised when an expression cannot be evaluated; fails the plan step."""


def eval_arith(expr: Term, s: Optional[Mapping[str, Term]] = None) -> Number:
    """Evaluate an arithmetic expression built from + - * / and numbers."""
    s = s or {}
    term = walk(expr, s)

    if isinstance(term, Number):
        return Number(term.value)
    if isinstance(term, Variable):
        raise EvaluationError(f"unbound variable {term.name} in arithmetic expression")
    if isinstance(term, Structure) and term.is_arithmetic:
        values = [eval_arith(arg, s).value for arg in term.args]
        if len(values) == 1:
            return Number(-values[0])
        left, right = values
        if term.functor == "+":
            return Number(left + right)
        if term.functor == "-":
            return Number(left - right)
        if term.functor == "*":
            return Number(left * right)
        if right == 0:
            raise EvaluationError("division by zero")
        return Number(left / right)
    raise EvaluationError(f"'{term}' is not a number")


def eval_relation(
    op: str,
    left: Term,
    right: Term,
    s: Optional[Mapping[str, Term]] = None,
) -> Optional[Substitution]:
    """Evaluate a comparison; returns the (possibly extended) substitution or None."""
    s = dict(s or {})

    if op in ORDERING_OPERATORS:
        lv = eval_arith(left, s).value
        rv = eval_arith(right, s).value
        holds = {
            "<": lv < rv,
            "<=": lv <= rv,
            ">": lv > rv,
            ">=": lv >= rv,
        }[op]
        return s if holds else None

    if op in ("==", "\\=="):
        same = strip_annots(apply(left, s)) == strip_annots(apply(right, s))
        if op == "==":
            return s if same else None
        return None if same else s

    if op == "=":
        return unify(_maybe_evaluate(left, s), _maybe_evaluate(right, s), s)

    raise EvaluationError(f"unknown relational operator '{op}'")


def _maybe_evaluate(term: Term, s: Mapping[str, Term]) -> Term:
    term = walk(term, s)
    if isinstance(term, Structure) and term.is_arithmetic:
        return eval_arith(term, s)
    return term
