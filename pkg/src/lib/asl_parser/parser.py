"""Recursive-descent parser for the AgentSpeak subset.

Grammar (informal):

    program   := clause*
    clause    := '!' literal '.'                          initial goal
               | trigger [':' context] ['<-' body] '.'    plan
               | literal ':-' context '.'                 rule
               | literal '.'                              belief
    trigger   := ('+' | '-') ['!'] literal
    context   := cond ('&' cond)*
    cond      := 'not' cond | '(' context ')' | expr [relop expr]
    body      := step (';' step)*
    expr      := mul (('+' | '-') mul)*
    mul       := unary (('*' | '/') unary)*
    unary     := '-' unary | primary
    primary   := NUMBER | VAR | STRING | list | ATOM ['(' args ')'] [annots] | '(' expr ')'
"""

from __future__ import annotations

import logging
from typing import List, Optional, Tuple

from ..terms import (
    RELATIONAL_OPERATORS,
    Atom,
    ListTerm,
    Number,
    StringTerm,
    Structure,
    Term,
    Variable,
)
from .ast import (
    AchieveAsync,
    AchieveSync,
    Action,
    AgentProgram,
    And,
    BeliefAdd,
    BeliefDelete,
    BeliefReplace,
    BodyStep,
    ContextFormula,
    InternalAction,
    Literal,
    Not,
    Plan,
    Polarity,
    Relation,
    RelationalStep,
    Rule,
    TestGoal,
    TriggerEvent,
    TriggerKind,
    Truth,
)
from .lexer import AslSyntaxError, Token, TokenType, tokenize

logger = logging.getLogger(__name__)


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    # token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.current
        if token.type is not TokenType.EOF:
            self.pos += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> AslSyntaxError:
        token = token or self.current
        text = token.text if token.type is not TokenType.EOF else "end of input"
        return AslSyntaxError(message, token.line, token.column, text)

    def expect(self, text: str) -> Token:
        if not self.current.is_punct(text):
            raise self.error(f"expected '{text}'")
        return self.advance()

    def accept(self, text: str) -> bool:
        if self.current.is_punct(text):
            self.advance()
            return True
        return False

    def at_eof(self) -> bool:
        return self.current.type is TokenType.EOF

    # program level

    def parse_program(self) -> AgentProgram:
        program = AgentProgram()
        while not self.at_eof():
            self.parse_clause(program)
        return program

    def parse_clause(self, program: AgentProgram) -> None:
        token = self.current
        if token.is_punct("!"):
            self.advance()
            goal = self.parse_literal_term()
            self.expect(".")
            program.initial_goals.append(goal)
            return
        if token.is_punct("+", "-"):
            program.plans.append(self.parse_plan())
            return

        head = self.parse_literal_term()
        if self.accept(":-"):
            body = self.parse_context()
            self.expect(".")
            program.rules.append(Rule(head, body))
            return
        self.expect(".")
        program.initial_beliefs.append(head)

    def parse_trigger(self) -> TriggerEvent:
        token = self.current
        if token.is_punct("+"):
            polarity = Polarity.ADD
        elif token.is_punct("-"):
            polarity = Polarity.DELETE
        else:
            raise self.error("expected '+' or '-' to start a triggering event")
        self.advance()
        kind = TriggerKind.ACHIEVE if self.accept("!") else TriggerKind.BELIEF
        return TriggerEvent(polarity, kind, self.parse_literal_term())

    def parse_plan(self) -> Plan:
        start = self.current
        trigger = self.parse_trigger()
        context: Optional[ContextFormula] = None
        body: Tuple[BodyStep, ...] = ()
        if self.accept(":"):
            context = self.parse_context()
        if self.accept("<-"):
            body = tuple(self.parse_body())
        if not body and context is None:
            raise self.error(f"plan for {trigger} has neither context nor body", start)
        self.expect(".")
        return Plan(trigger, context, body)

    # context formulas

    def parse_context(self) -> ContextFormula:
        parts = [self.parse_condition()]
        while self.accept("&"):
            parts.append(self.parse_condition())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_condition(self) -> ContextFormula:
        token = self.current
        if token.type is TokenType.ATOM and token.text == "not":
            self.advance()
            inner = self.parse_condition()
            if isinstance(inner, And):
                raise self.error("negation applies to a literal or a comparison", token)
            return Not(inner)
        if token.is_punct("(") and self._parenthesised_formula():
            self.advance()
            inner = self.parse_context()
            self.expect(")")
            return inner

        left = self.parse_expression()
        if self.current.type is TokenType.PUNCT and self.current.text in RELATIONAL_OPERATORS:
            op = self.advance().text
            right = self.parse_expression()
            return Relation(op, left, right)
        if isinstance(left, Atom) and left.name == "true" and not left.annots:
            return Truth()
        if isinstance(left, (Atom, Structure)) and not _is_arithmetic(left):
            return Literal(left)
        raise self.error("expected a literal or a comparison", token)

    def _parenthesised_formula(self) -> bool:
        """Look ahead to decide whether '(' opens a formula or an arithmetic group."""
        depth = 0
        index = self.pos
        while index < len(self.tokens):
            token = self.tokens[index]
            if token.is_punct("("):
                depth += 1
            elif token.is_punct(")"):
                depth -= 1
                if depth == 0:
                    following = self.tokens[index + 1] if index + 1 < len(self.tokens) else token
                    return not (following.type is TokenType.PUNCT and
                                following.text in RELATIONAL_OPERATORS + ("+", "-", "*", "/"))
            elif token.type is TokenType.EOF:
                return False
            index += 1
        return False

    # body

    def parse_body(self) -> List[BodyStep]:
        steps = [self.parse_step()]
        while self.accept(";"):
            steps.append(self.parse_step())
        return steps

    def parse_step(self) -> BodyStep:
        token = self.current
        if token.is_punct("!!"):
            self.advance()
            return AchieveAsync(self.parse_literal_term())
        if token.is_punct("!"):
            self.advance()
            return AchieveSync(self.parse_literal_term())
        if token.is_punct("?"):
            self.advance()
            return TestGoal(self.parse_literal_term())
        if token.is_punct("-+"):
            self.advance()
            return BeliefReplace(self.parse_literal_term())
        if token.is_punct("+"):
            self.advance()
            return BeliefAdd(self.parse_literal_term())
        if token.is_punct("-"):
            self.advance()
            return BeliefDelete(self.parse_literal_term())
        if token.type is TokenType.INTERNAL:
            self.advance()
            args: Tuple[Term, ...] = ()
            if self.accept("("):
                args = tuple(self.parse_arguments(")"))
            return InternalAction(token.text, args)

        left = self.parse_expression()
        if self.current.type is TokenType.PUNCT and self.current.text in RELATIONAL_OPERATORS:
            op = self.advance().text
            return RelationalStep(op, left, self.parse_expression())
        if isinstance(left, (Atom, Structure)) and not _is_arithmetic(left):
            return Action(left)
        raise self.error("expected a body step", token)

    # terms

    def parse_literal_term(self) -> Term:
        token = self.current
        if token.type is not TokenType.ATOM:
            raise self.error("expected a literal")
        term = self.parse_primary()
        if not isinstance(term, (Atom, Structure)):
            raise self.error("expected a literal", token)
        return term

    def parse_expression(self) -> Term:
        left = self.parse_mul()
        while self.current.is_punct("+", "-"):
            op = self.advance().text
            left = Structure(op, (left, self.parse_mul()))
        return left

    def parse_mul(self) -> Term:
        left = self.parse_unary()
        while self.current.is_punct("*", "/"):
            op = self.advance().text
            left = Structure(op, (left, self.parse_unary()))
        return left

    def parse_unary(self) -> Term:
        if self.current.is_punct("-"):
            self.advance()
            if self.current.type is TokenType.NUMBER:
                return Number(-float(self.advance().text))
            return Structure("-", (self.parse_unary(),))
        return self.parse_primary()

    def parse_primary(self) -> Term:
        token = self.current
        if token.type is TokenType.NUMBER:
            self.advance()
            return Number(float(token.text))
        if token.type is TokenType.VAR:
            self.advance()
            return Variable(token.text)
        if token.type is TokenType.STRING:
            self.advance()
            return StringTerm(token.text)
        if token.is_punct("["):
            self.advance()
            return ListTerm(tuple(self.parse_arguments("]")))
        if token.is_punct("("):
            self.advance()
            inner = self.parse_expression()
            self.expect(")")
            return inner
        if token.type is TokenType.ATOM:
            self.advance()
            term: Term
            if self.current.is_punct("("):
                self.advance()
                term = Structure(token.text, tuple(self.parse_arguments(")")))
            else:
                term = Atom(token.text)
            if self.current.is_punct("["):
                self.advance()
                annots = tuple(self.parse_arguments("]"))
                if not annots:
                    raise self.error("empty annotation list")
                if isinstance(term, Structure):
                    term = Structure(term.functor, term.args, annots)
                else:
                    term = Atom(term.name, annots)
            return term
        raise self.error("unexpected token")

    def parse_arguments(self, closing: str) -> List[Term]:
        items: List[Term] = []
        if self.accept(closing):
            if closing == ")":
                raise self.error("empty argument list", self.tokens[self.pos - 1])
            return items
        items.append(self.parse_expression())
        while self.accept(","):
            items.append(self.parse_expression())
        self.expect(closing)
        return items


def _is_arithmetic(term: Term) -> bool:
    return isinstance(term, Structure) and term.is_arithmetic


def parse_agent_program(source: str) -> AgentProgram:
    """Parse a complete agent source into an AgentProgram."""
    program = _Parser(source).parse_program()
    logger.debug("Parsed agent program: %s", program.summary())
    return program


def parse_trigger(text: str) -> TriggerEvent:
    """Parse a standalone triggering event such as `+light(_,_)`."""
    parser = _Parser(text)
    trigger = parser.parse_trigger()
    if not parser.at_eof():
        raise parser.error("unexpected text after triggering event")
    return trigger


def parse_term(text: str) -> Term:
    """Parse a single term (used for uniqueness patterns and test fixtures)."""
    parser = _Parser(text)
    term = parser.parse_expression()
    if not parser.at_eof():
        raise parser.error("unexpected text after term")
    return term


def parse_context(text: str) -> ContextFormula:
    parser = _Parser(text)
    formula = parser.parse_context()
    if not parser.at_eof():
        raise parser.error("unexpected text after formula")
    return formula
