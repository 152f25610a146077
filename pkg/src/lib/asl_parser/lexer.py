"""Tokenizer for agent sources."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List


class AslSyntaxError(Exception):
    """Syntax error with source position and the offending token."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        super().__init__(str(self))

    def __str__(self) -> str:
        near = f" (near '{self.token}')" if self.token else ""
        return f"line {self.line}, column {self.column}: {self.message}{near}"


class TokenType(Enum):
    ATOM = "atom"
    VAR = "variable"
    NUMBER = "number"
    STRING = "string"
    INTERNAL = "internal"
    PUNCT = "punct"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    type: TokenType
    text: str
    line: int
    column: int

    def is_punct(self, *texts: str) -> bool:
        return self.type is TokenType.PUNCT and self.text in texts


# Longest first so that greedy matching picks compound operators.
_PUNCTUATION = (
    "\\==", ":-", "<-", "<=", ">=", "==", "-+", "!!",
    "(", ")", "[", "]", ",", ".", ";", ":", "&", "!", "?",
    "+", "-", "*", "/", "<", ">", "=",
)


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    line = 1
    line_start = 0
    n = len(source)

    def column() -> int:
        return i - line_start + 1

    while i < n:
        ch = source[i]

        if ch == "\n":
            i += 1
            line += 1
            line_start = i
            continue
        if ch in " \t\r\f\v":
            i += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            start_line, start_col = line, column()
            end = source.find("*/", i + 2)
            if end < 0:
                raise AslSyntaxError("unterminated block comment", start_line, start_col, "/*")
            for offset in range(i, end):
                if source[offset] == "\n":
                    line += 1
                    line_start = offset + 1
            i = end + 2
            continue

        col = column()

        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j + 1 < n and source[j] == "." and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            tokens.append(Token(TokenType.NUMBER, source[i:j], line, col))
            i = j
            continue

        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = TokenType.VAR if (word[0].isupper() or word[0] == "_") else TokenType.ATOM
            tokens.append(Token(kind, word, line, col))
            i = j
            continue

        if ch == '"':
            j = i + 1
            chars = []
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise AslSyntaxError("unterminated string literal", line, col, source[i:j])
                if source[j] == "\\" and j + 1 < n:
                    j += 1
                chars.append(source[j])
                j += 1
            if j >= n:
                raise AslSyntaxError("unterminated string literal", line, col, source[i:j])
            tokens.append(Token(TokenType.STRING, "".join(chars), line, col))
            i = j + 1
            continue

        if ch == "." and i + 1 < n and source[i + 1].isalpha() and source[i + 1].islower():
            j = i + 1
            while j < n and (source[j].isalnum() or source[j] == "_" or
                             (source[j] == "." and j + 1 < n and source[j + 1].isalpha())):
                j += 1
            tokens.append(Token(TokenType.INTERNAL, source[i + 1:j], line, col))
            i = j
            continue

        for punct in _PUNCTUATION:
            if source.startswith(punct, i):
                tokens.append(Token(TokenType.PUNCT, punct, line, col))
                i += len(punct)
                break
        else:
            raise AslSyntaxError("unexpected character", line, col, ch)

    tokens.append(Token(TokenType.EOF, "", line, column()))
    return tokens
