"""Source spans and user-facing diagnostics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"

    def to_json(self) -> dict:
        return {"file": self.file, "line": self.line, "col": self.col}


class PolarError(Exception):
    """An error attributable to the input program."""

    def __init__(self, code: str, message: str, span: Optional[Span] = None, notes=()):
        super().__init__(message)
        self.code = code
        self.message = message
        self.span = span
        self.notes = list(notes)

    def diagnostic(self) -> "Diagnostic":
        return Diagnostic(self.code, self.message, self.span, tuple(self.notes))


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Optional[Span] = None
    notes: tuple = field(default=())
    severity: str = "error"

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "span": None if self.span is None else self.span.to_json(),
            "code": self.code,
            "message": self.message,
            "notes": list(self.notes),
        }

    def render(self) -> str:
        where = f"{self.span}: " if self.span is not None else ""
        lines = [f"{where}{self.severity}[{self.code}]: {self.message}"]
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True)
