"""Tokenizer for `.pol` sources."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..diagnostics import PolarError, Span

KEYWORDS = frozenset(
    {"data", "codata", "def", "codef", "let", "match", "comatch", "as", "return", "absurd", "implicit", "Type"}
)

# longest symbols first
SYMBOLS = (":=", "=>", "->", "↦", "→", "(", ")", "{", "}", ",", ":", ".", "\\", "λ", ";")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_NUM = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "num" | "kw" | "sym" | "hole" | "eof"
    text: str
    span: Span

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(source: str, file: str = "<input>") -> list:
    toks = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if source.startswith("--", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        span = Span(file, line, col)
        m = _IDENT.match(source, i)
        if m:
            text = m.group()
            if text == "_":
                kind = "hole"
            elif text in KEYWORDS:
                kind = "kw"
            else:
                kind = "ident"
            toks.append(Token(kind, text, span))
            i, col = m.end(), col + len(text)
            continue
        m = _NUM.match(source, i)
        if m:
            toks.append(Token("num", m.group(), span))
            i, col = m.end(), col + len(m.group())
            continue
        for s in SYMBOLS:
            if source.startswith(s, i):
                canon = {"↦": "=>", "→": "->", "λ": "\\"}.get(s, s)
                toks.append(Token("sym", canon, span))
                i, col = i + len(s), col + len(s)
                break
        else:
            raise PolarError("SyntaxError", f"unexpected character {c!r}", span)
    toks.append(Token("eof", "", Span(file, line, col)))
    return toks
