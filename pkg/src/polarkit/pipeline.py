"""Loading, checking and evaluating programs: the library-level entry points."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .core import GlobalEnv, Var
from .diagnostics import Diagnostic, PolarError
from .eval import DEFAULT_FUEL, Env, deep_nf, normalize
from .pretty import show_decl
from .surface import DesugarResult, desugar, desugar_expr, parse, parse_expr
from .typecheck import CheckResult, check_program, global_name

PRELUDE_PATH = Path(__file__).parent / "std" / "prelude.pol"


def prelude_source() -> str:
    return PRELUDE_PATH.read_text(encoding="utf-8")


@dataclass
class Program:
    genv: Optional[GlobalEnv]
    diagnostics: list = field(default_factory=list)
    result: Optional[CheckResult] = None
    prelude_decls: int = 0
    fuel: int = DEFAULT_FUEL
    desugared: Optional[DesugarResult] = None

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    @property
    def metas(self):
        return self.result.metas

    @property
    def globals(self):
        return self.result.globals

    def let_names(self) -> list:
        return [d.name for d in self.genv.decls if type(d).__name__ == "LetDecl"]

    def term(self, name: str):
        """The core term naming a top-level let, scoped over the global context."""
        if name not in self.genv.lets:
            raise PolarError("UnknownName", f"no top-level let named {name}")
        return Var(global_name(name))

    def parse_term(self, text: str, scope=()):
        """Desugar a standalone expression against this program; ``scope`` lists bound local names."""
        if self.desugared is None:
            raise PolarError("InvalidProgram", "the program failed to parse or desugar")
        return desugar_expr(parse_expr(text), self.desugared, tuple(scope))

    def whnf(self, name: str, fuel: Optional[int] = None):
        return normalize(self.globals, self.term(name), self.metas, fuel or self.fuel)

    def evaluate(self, name: str, fuel: Optional[int] = None):
        """Weak head normal form at every position outside (co)match bodies."""
        return deep_nf(self.term(name), Env(self.globals), self.metas, fuel or self.fuel)

    def elaborated_text(self, include_prelude: bool = False) -> str:
        decls = self.genv.decls if include_prelude else self.genv.decls[self.prelude_decls :]
        return "\n\n".join(show_decl(d) for d in decls) + "\n"


def load_source(
    source: str,
    file: str = "<input>",
    prelude: bool = True,
    fuel: int = DEFAULT_FUEL,
    conv_trace: Optional[list] = None,
    unify_trace: Optional[list] = None,
    record_constraints: bool = False,
) -> Program:
    return load_sources([(file, source)], prelude, fuel, conv_trace, unify_trace, record_constraints)


def resolve_path(path) -> Path:
    """`std/prelude.pol` names the shipped prelude unless such a file exists locally."""
    p = Path(path)
    if not p.exists() and p.as_posix().endswith("std/prelude.pol"):
        return PRELUDE_PATH
    return p


def load_program(paths, prelude: bool = True, fuel: int = DEFAULT_FUEL, **kw) -> Program:
    sources = [(str(p), resolve_path(p).read_text(encoding="utf-8")) for p in paths]
    # an explicitly listed prelude replaces the implicit one
    if prelude and any(text == prelude_source() for _, text in sources):
        prelude = False
    return load_sources(sources, prelude, fuel, **kw)


def load_sources(
    sources,
    prelude: bool = True,
    fuel: int = DEFAULT_FUEL,
    conv_trace: Optional[list] = None,
    unify_trace: Optional[list] = None,
    record_constraints: bool = False,
) -> Program:
    if prelude:
        sources = [("std/prelude.pol", prelude_source()), *sources]
    try:
        parsed = [parse(text, file) for file, text in sources]
        n_prelude = len(parsed[0].decls) if prelude else 0
        ds = desugar(parsed)
    except PolarError as err:
        return Program(None, [err.diagnostic()], fuel=fuel)
    result = check_program(ds.genv, fuel, conv_trace, unify_trace, record_constraints)
    diags: list[Diagnostic] = list(result.diagnostics)
    return Program(ds.genv, diags, result, n_prelude, fuel, ds)
