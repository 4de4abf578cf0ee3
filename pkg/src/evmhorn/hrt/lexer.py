"""Tokenizer for the specification language."""
from __future__ import annotations

import re
from dataclasses import dataclass


class HrtParseError(ValueError):
    """Raised when specification text cannot be lexed or parsed."""


class LexError(HrtParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int

    def __repr__(self) -> str:
        return f"{self.kind}({self.text!r})@{self.line}:{self.col}"


KEYWORDS = {
    "datatype", "pred", "op", "sel", "rule", "query", "test", "clause",
    "for", "in", "let", "macro", "match", "with", "select", "store",
    "expect", "SAT", "UNSAT", "unit", "int", "bool", "array",
    "mod", "div", "true", "false",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<hex>0x[0-9a-fA-F]+)
  | (?P<num>\d+)
  | (?P<qvar>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<neq>!=)
  | (?P<pvar>![A-Za-z_][A-Za-z0-9_]*)
  | (?P<cons>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<mref>\#[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>:=|=>|->|<=|>=|&&|\|\||[()\[\]{}<>,;:=+\-*?~|_])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r} at line {line}")
        kind = m.lastgroup or ""
        value = m.group()
        col = pos - line_start + 1
        if kind not in ("ws", "comment"):
            if kind in ("num", "hex"):
                tokens.append(Token("num", value, line, col))
            elif kind == "neq":
                tokens.append(Token("sym", "!=", line, col))
            elif kind == "ident" and value == "_":
                tokens.append(Token("sym", "_", line, col))
            elif kind == "ident" and value in KEYWORDS:
                tokens.append(Token("kw", value, line, col))
            else:
                tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, 0))
    return tokens
