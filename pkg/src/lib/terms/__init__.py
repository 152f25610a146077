"""
Logical Terms for the AgentSpeak Runtime.

Classes:
    Atom, Number, Variable, StringTerm, ListTerm, Structure: immutable terms
    EvaluationError: raised by arithmetic/relational evaluation

Features:
    - Unification with occurs-check; `_` never binds
    - Annotations carried on terms but ignored while matching
    - Arithmetic (+ - * /) and relational (< <= > >= == \\== =) evaluation
    - Canonical surface-syntax rendering (`light(1,360)[source(percept)]`)
"""

from .core import (
    ARITHMETIC_OPERATORS,
    Atom,
    ListTerm,
    Number,
    StringTerm,
    Structure,
    Term,
    TermError,
    Variable,
    add_annot,
    annotations,
    atom,
    coerce,
    format_term,
    functor_of,
    is_ground,
    iter_variables,
    merge_annots,
    source_annot,
    strip_annots,
    struct,
    with_annots,
)
from .evaluate import (
    ORDERING_OPERATORS,
    RELATIONAL_OPERATORS,
    EvaluationError,
    eval_arith,
    eval_relation,
)
from .unify import (
    Substitution,
    apply,
    fresh_suffix,
    occurs,
    rename_variables,
    resolve,
    unify,
    unify_annotations,
    walk,
)

__all__ = [
    "ARITHMETIC_OPERATORS",
    "ORDERING_OPERATORS",
    "RELATIONAL_OPERATORS",
    "Atom",
    "EvaluationError",
    "ListTerm",
    "Number",
    "StringTerm",
    "Structure",
    "Substitution",
    "Term",
    "TermError",
    "Variable",
    "add_annot",
    "annotations",
    "apply",
    "atom",
    "coerce",
    "eval_arith",
    "eval_relation",
    "format_term",
    "fresh_suffix",
    "functor_of",
    "is_ground",
    "iter_variables",
    "merge_annots",
    "occurs",
    "rename_variables",
    "resolve",
    "source_annot",
    "strip_annots",
    "struct",
    "unify",
    "unify_annotations",
    "walk",
    "with_annots",
]
