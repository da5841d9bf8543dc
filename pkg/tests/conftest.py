from __future__ import annotations

import functools
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
NEG = CORPUS / "neg"

sys.path.insert(0, str(Path(__file__).resolve().parent))

from polarkit import load_program, load_source  # noqa: E402


def needs_no_prelude(path: Path) -> bool:
    return "--no-prelude" in path.read_text(encoding="utf-8")


POSITIVE = sorted(CORPUS.glob("*.pol"))
NEGATIVE = sorted(NEG.glob("*.pol"))


@functools.lru_cache(maxsize=None)
def load_corpus(name: str, record_constraints: bool = False):
    path = CORPUS / name
    return load_program([path], prelude=not needs_no_prelude(path), record_constraints=record_constraints)


@functools.lru_cache(maxsize=None)
def prelude_program():
    prog = load_source("", "<empty>")
    assert prog.ok, prog.diagnostics
    return prog


@pytest.fixture
def prelude():
    return prelude_program()
