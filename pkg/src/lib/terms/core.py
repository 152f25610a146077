"""Logical term types shared by every part of the agent runtime.

Terms are immutable. Annotations ride along on atoms, numbers, lists and
structures but never take part in unification; helpers here strip, merge
and render them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Tuple, Union


ARITHMETIC_OPERATORS = ("+", "-", "*", "/")


class TermError(Exception):
    """Base error for term handling."""


@dataclass(frozen=True)
class Atom:
    name: str
    annots: Tuple["Term", ...] = ()

    def __str__(self) -> str:
        return self.name + format_annots(self.annots)


@dataclass(frozen=True)
class Number:
    value: float
    annots: Tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(self.value))

    def __str__(self) -> str:
        return format_number(self.value) + format_annots(self.annots)


@dataclass(frozen=True)
class Variable:
    name: str

    @property
    def anonymous(self) -> bool:
        return self.name == "_"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class StringTerm:
    """Quoted string literal, only used as an internal action argument."""

    value: str

    def __str__(self) -> str:
        escaped = self.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'


@dataclass(frozen=True)
class ListTerm:
    items: Tuple["Term", ...] = ()
    annots: Tuple["Term", ...] = ()

    def __str__(self) -> str:
        body = ",".join(format_term(item) for item in self.items)
        return f"[{body}]" + format_annots(self.annots)


@dataclass(frozen=True)
class Structure:
    functor: str
    args: Tuple["Term", ...]
    annots: Tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        if not self.args:
            raise TermError(f"structure '{self.functor}' needs at least one argument; use Atom")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_arithmetic(self) -> bool:
        if len(self.args) == 1:
            return self.functor == "-"
        return self.functor in ARITHMETIC_OPERATORS and len(self.args) == 2

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Atom, Number, Variable, StringTerm, ListTerm, Structure]


def atom(name: str) -> Atom:
    return Atom(name)


def struct(functor: str, *args: Union["Term", int, float, str]) -> Structure:
    """Build a structure, coercing Python numbers to Number and
    capitalised strings to Variable, lower-case strings to Atom."""
    return Structure(functor, tuple(coerce(arg) for arg in args))


def coerce(value: Union["Term", int, float, str, list]) -> "Term":
    if isinstance(value, (Atom, Number, Variable, StringTerm, ListTerm, Structure)):
        return value
    if isinstance(value, bool):
        return Atom("true" if value else "false")
    if isinstance(value, (int, float)):
        return Number(value)
    if isinstance(value, list):
        return ListTerm(tuple(coerce(item) for item in value))
    if isinstance(value, str):
        if value[:1].isupper() or value[:1] == "_":
            return Variable(value)
        return Atom(value)
    raise TermError(f"cannot build a term from {value!r}")


def functor_of(term: "Term") -> Tuple[str, int]:
    """Name/arity key used to index beliefs and plan triggers."""
    if isinstance(term, Structure):
        return term.functor, term.arity
    if isinstance(term, Atom):
        return term.name, 0
    return "", -1


def annotations(term: "Term") -> Tuple["Term", ...]:
    return getattr(term, "annots", ())


def with_annots(term: "Term", annots: Tuple["Term", ...]) -> "Term":
    if isinstance(term, (Variable, StringTerm)):
        return term
    return replace(term, annots=tuple(annots))


def strip_annots(term: "Term") -> "Term":
    """Drop annotations at the top level and inside arguments."""
    if isinstance(term, Structure):
        return Structure(term.functor, tuple(strip_annots(arg) for arg in term.args))
    if isinstance(term, ListTerm):
        return ListTerm(tuple(strip_annots(item) for item in term.items))
    if isinstance(term, (Atom, Number)):
        return replace(term, annots=())
    return term


def add_annot(term: "Term", annot: "Term") -> "Term":
    """Return term with annot appended unless an equal one is present."""
    current = annotations(term)
    if annot in current:
        return term
    return with_annots(term, current + (annot,))


def merge_annots(left: Tuple["Term", ...], right: Tuple["Term", ...]) -> Tuple["Term", ...]:
    merged = list(left)
    for annot in right:
        if annot not in merged:
            merged.append(annot)
    return tuple(merged)


def source_annot(source: str) -> Structure:
    return Structure("source", (Atom(source),))


def iter_variables(term: "Term") -> Iterator[Variable]:
    if isinstance(term, Variable):
        yield term
    elif isinstance(term, Structure):
        for arg in term.args:
            yield from iter_variables(arg)
    elif isinstance(term, ListTerm):
        for item in term.items:
            yield from iter_variables(item)
    for annot in annotations(term):
        yield from iter_variables(annot)


def is_ground(term: "Term", ignore_anonymous: bool = False) -> bool:
    for var in iter_variables(term):
        if ignore_anonymous and var.anonymous:
            continue
        return False
    return True


def format_number(value: float) -> str:
    if math.isfinite(value) and value == int(value):
        return str(int(value))
    return repr(value)


def format_annots(annots: Tuple["Term", ...]) -> str:
    if not annots:
        return ""
    return "[" + ",".join(format_term(annot) for annot in annots) + "]"


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_term(term: "Term") -> str:
    """Canonical surface text; arithmetic structures print infix."""
    if isinstance(term, Structure):
        if term.is_arithmetic and not term.annots:
            return _format_arithmetic(term)
        args = ",".join(format_term(arg) for arg in term.args)
        return f"{term.functor}({args})" + format_annots(term.annots)
    return str(term)


def _format_arithmetic(term: Structure) -> str:
    if len(term.args) == 1:
        return f"-{_format_operand(term.args[0], 3, False)}"
    level = _PRECEDENCE[term.functor]
    left = _format_operand(term.args[0], level, False)
    right = _format_operand(term.args[1], level, True)
    return f"{left} {term.functor} {right}"


def _format_operand(term: "Term", parent_level: int, right_side: bool) -> str:
    text = format_term(term)
    if isinstance(term, Structure) and term.is_arithmetic and not term.annots and len(term.args) == 2:
        level = _PRECEDENCE[term.functor]
        if level < parent_level or (right_side and level == parent_level):
            return f"({text})"
    elif isinstance(term, Number) and term.value < 0 and parent_level > 0 and right_side:
        return f"({text})"
    return text
