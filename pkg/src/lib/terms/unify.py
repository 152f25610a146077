"""Substitutions and syntactic unification with occurs-check."""

from __future__ import annotations

import itertools
from typing import Dict, Mapping, Optional

from .core import (
    Atom,
    ListTerm,
    Number,
    StringTerm,
    Structure,
    Term,
    Variable,
    annotations,
    with_annots,
)


Substitution = Dict[str, Term]

_rename_counter = itertools.count(1)


def walk(term: Term, s: Mapping[str, Term]) -> Term:
    """Follow variable bindings until reaching a non-variable or a free variable."""
    while isinstance(term, Variable) and not term.anonymous and term.name in s:
        term = s[term.name]
    return term


def occurs(var: Variable, term: Term, s: Mapping[str, Term]) -> bool:
    term = walk(term, s)
    if isinstance(term, Variable):
        return term.name == var.name
    if isinstance(term, Structure):
        return any(occurs(var, arg, s) for arg in term.args)
    if isinstance(term, ListTerm):
        return any(occurs(var, item, s) for item in term.items)
    return False


def unify(a: Term, b: Term, s: Optional[Mapping[str, Term]] = None) -> Optional[Substitution]:
    """Unify a and b under s, ignoring annotations.

    Returns an extended copy of s, or None when the terms do not unify.
    The input substitution is never mutated.
    """
    result: Substitution = dict(s or {})
    if _unify_into(a, b, result):
        return result
    return None


def _unify_into(a: Term, b: Term, s: Substitution) -> bool:
    a = walk(a, s)
    b = walk(b, s)

    if isinstance(a, Variable) or isinstance(b, Variable):
        if isinstance(a, Variable) and a.anonymous:
            return True
        if isinstance(b, Variable) and b.anonymous:
            return True
        if isinstance(a, Variable) and isinstance(b, Variable) and a.name == b.name:
            return True
        var, other = (a, b) if isinstance(a, Variable) else (b, a)
        if occurs(var, other, s):
            return False
        s[var.name] = other
        return True

    if isinstance(a, Atom) and isinstance(b, Atom):
        return a.name == b.name
    if isinstance(a, Number) and isinstance(b, Number):
        return a.value == b.value
    if isinstance(a, StringTerm) and isinstance(b, StringTerm):
        return a.value == b.value
    if isinstance(a, ListTerm) and isinstance(b, ListTerm):
        if len(a.items) != len(b.items):
            return False
        return all(_unify_into(x, y, s) for x, y in zip(a.items, b.items))
    if isinstance(a, Structure) and isinstance(b, Structure):
        if a.functor != b.functor or a.arity != b.arity:
            return False
        return all(_unify_into(x, y, s) for x, y in zip(a.args, b.args))
    return False


def apply(term: Term, s: Mapping[str, Term]) -> Term:
    """Replace every bound variable in term (annotations included)."""
    term = walk(term, s)
    if isinstance(term, Variable):
        return term
    if isinstance(term, Structure):
        return Structure(
            term.functor,
            tuple(apply(arg, s) for arg in term.args),
            tuple(apply(annot, s) for annot in term.annots),
        )
    if isinstance(term, ListTerm):
        return ListTerm(
            tuple(apply(item, s) for item in term.items),
            tuple(apply(annot, s) for annot in term.annots),
        )
    if annotations(term):
        return with_annots(term, tuple(apply(annot, s) for annot in annotations(term)))
    return term


def resolve(s: Mapping[str, Term]) -> Substitution:
    """Fully apply a substitution to itself; the result is idempotent."""
    return {name: apply(value, s) for name, value in s.items()}


def rename_variables(term: Term, suffix: Optional[str] = None, mapping: Optional[Dict[str, str]] = None) -> Term:
    """Standardise a term apart by suffixing every named variable.

    `mapping` collects old-name to new-name pairs so callers can rename
    several terms consistently.
    """
    if suffix is None:
        suffix = str(next(_rename_counter))
    if mapping is None:
        mapping = {}

    def rename(t: Term) -> Term:
        if isinstance(t, Variable):
            if t.anonymous:
                return t
            new_name = mapping.setdefault(t.name, f"{t.name}#{suffix}")
            return Variable(new_name)
        if isinstance(t, Structure):
            return Structure(t.functor, tuple(rename(a) for a in t.args), tuple(rename(a) for a in t.annots))
        if isinstance(t, ListTerm):
            return ListTerm(tuple(rename(i) for i in t.items), tuple(rename(a) for a in t.annots))
        if annotations(t):
            return with_annots(t, tuple(rename(a) for a in annotations(t)))
        return t

    return rename(term)


def fresh_suffix() -> str:
    return str(next(_rename_counter))


def unify_annotations(pattern: Term, target: Term, s: Mapping[str, Term]) -> Optional[Substitution]:
    """Check that every annotation of pattern unifies with some annotation of target."""
    result: Optional[Substitution] = dict(s)
    for wanted in annotations(pattern):
        for candidate in annotations(target):
            extended = unify(wanted, candidate, result)
            if extended is not None:
                result = extended
                break
        else:
            return None
    return result
