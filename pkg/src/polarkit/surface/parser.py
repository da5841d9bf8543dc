"""Recursive-descent parser; grammar in docs/grammar.md."""

from __future__ import annotations

from ..diagnostics import PolarError
from .ast import (
    SAnn,
    SArg,
    SArrow,
    SCase,
    SCodata,
    SCodef,
    SComatch,
    SCtor,
    SData,
    SDef,
    SDot,
    SDtor,
    SHole,
    SLambda,
    SLet,
    SLetDecl,
    SMatch,
    SNum,
    SParam,
    SType,
    SurfaceProgram,
    SVar,
)
from .lexer import Token, tokenize


class Parser:
    def __init__(self, source: str, file: str = "<input>"):
        self.toks = tokenize(source, file)
        self.pos = 0
        self.file = file
        # alternatives probed at each position, for error messages
        self._tried: dict = {}

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        if t.kind in ("sym", "kw") and t.text == text:
            return True
        self._tried.setdefault(self.pos, set()).add(f"'{text}'")
        return False

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def error(self, expected) -> PolarError:
        exp = sorted(set(expected) | self._tried.get(self.pos, set()))
        return PolarError(
            "SyntaxError",
            f"unexpected {self.tok.describe()}; expected one of: {', '.join(exp)}",
            self.tok.span,
            notes=[f"expected: {', '.join(exp)}"],
        )

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error([f"'{text}'"])
        t = self.tok
        self.pos += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise self.error(["identifier"])
        t = self.tok
        self.pos += 1
        return t.text

    def binder(self) -> str:
        if self.tok.kind == "hole":
            self.pos += 1
            return "_"
        return self.ident()

    def sep_list(self, close: str, item) -> list:
        """Items separated by commas up to ``close`` (consumed); a trailing comma is allowed."""
        out = []
        while not self.at(close):
            out.append(item())
            if not self.accept(","):
                break
        self.expect(close)
        return out

    # -- declarations

    def program(self) -> SurfaceProgram:
        decls = []
        while self.tok.kind != "eof":
            decls.append(self.decl())
        return SurfaceProgram(decls, self.file)

    def decl(self):
        t = self.tok
        if self.at("data"):
            return self.data_decl()
        if self.at("codata"):
            return self.codata_decl()
        if self.at("def"):
            return self.def_decl()
        if self.at("codef"):
            return self.codef_decl()
        if self.at("let"):
            self.pos += 1
            name = self.ident()
            self.expect(":")
            ty = self.expr()
            self.expect("{")
            body = self.expr()
            self.expect("}")
            return SLetDecl(name, ty, body, t.span)
        raise self.error(["'data'", "'codata'", "'def'", "'codef'", "'let'"])

    def tele(self) -> list:
        if not self.at("("):
            return []
        self.pos += 1
        params: list = []

        def group():
            implicit = self.accept("implicit")
            names = [self.binder()]
            while self.tok.kind in ("ident", "hole"):
                names.append(self.binder())
            self.expect(":")
            ty = self.expr()
            params.extend(SParam(n, ty, implicit) for n in names)

        self.sep_list(")", group)
        return params

    def opt_args(self):
        if not self.at("("):
            return None
        self.pos += 1
        return self.sep_list(")", self.arg)

    def arg(self) -> SArg:
        if self.tok.kind == "ident" and self.peek().kind == "sym" and self.peek().text == ":=":
            name = self.ident()
            self.pos += 1
            return SArg(self.expr(), name)
        return SArg(self.expr())

    def data_decl(self) -> SData:
        t = self.expect("data")
        name = self.ident()
        params = self.tele()
        self.expect("{")

        def ctor():
            s = self.tok.span
            cname = self.ident()
            cparams = self.tele()
            result = None
            if self.accept(":"):
                result = (self.ident(), self.opt_args())
            return SCtor(cname, cparams, result, s)

        ctors = self.sep_list("}", ctor)
        return SData(name, params, ctors, t.span)

    def self_spec(self):
        """`(x: T(args))` or `T(args)` before a destructor or definition name."""
        if self.at("(") and self.peek().kind == "ident" and self.peek(2).text == ":":
            self.pos += 1
            self_name = self.ident()
            self.expect(":")
            tname = self.ident()
            targs = self.opt_args()
            self.expect(")")
            return self_name, tname, targs
        tname = self.ident()
        return None, tname, self.opt_args()

    def codata_decl(self) -> SCodata:
        t = self.expect("codata")
        name = self.ident()
        params = self.tele()
        self.expect("{")

        def dtor():
            s = self.tok.span
            self_name = self_type = self_args = None
            if not self.at("."):
                self_name, self_type, self_args = self.self_spec()
            self.expect(".")
            dname = self.ident()
            dparams = self.tele()
            self.expect(":")
            ret = self.expr()
            return SDtor(self_name, self_type, self_args, dname, dparams, ret, s)

        dtors = self.sep_list("}", dtor)
        return SCodata(name, params, dtors, t.span)

    def def_decl(self) -> SDef:
        t = self.expect("def")
        self_name, self_type, self_args = self.self_spec()
        self.expect(".")
        name = self.ident()
        params = self.tele()
        self.expect(":")
        ret = self.expr()
        self.expect("{")
        cases = self.sep_list("}", self.case)
        return SDef(self_name, self_type, self_args, name, params, ret, cases, t.span)

    def codef_decl(self) -> SCodef:
        t = self.expect("codef")
        name = self.ident()
        params = self.tele()
        self.expect(":")
        tname = self.ident()
        targs = self.opt_args()
        self.expect("{")
        cocases = self.sep_list("}", self.cocase)
        return SCodef(name, params, tname, targs, cocases, t.span)

    # -- clauses

    def binders(self):
        if not self.at("("):
            return None
        self.pos += 1
        return self.sep_list(")", self.binder)

    def clause_rest(self, name: str, span) -> SCase:
        bs = self.binders()
        if self.accept("absurd"):
            return SCase(name, bs, None, span)
        if not self.accept("=>"):
            raise self.error(["'=>'", "'absurd'", "'('"])
        return SCase(name, bs, self.expr(), span)

    def case(self) -> SCase:
        s = self.tok.span
        return self.clause_rest(self.ident(), s)

    def cocase(self) -> SCase:
        s = self.expect(".").span
        return self.clause_rest(self.ident(), s)

    # -- expressions

    def expr(self):
        t = self.tok
        if self.at("\\"):
            self.pos += 1
            dname = self.ident()
            bs = self.binders()
            self.expect("=>")
            return SLambda(dname, bs, self.expr(), t.span)
        if self.at("let"):
            self.pos += 1
            name = self.ident()
            self.expect(":")
            ty = self.expr()
            self.expect(":=")
            bound = self.expr()
            self.expect(";")
            return SLet(name, ty, bound, self.expr(), t.span)
        lhs = self.postfix()
        if self.accept("->"):
            return SArrow(lhs, self.expr(), t.span)
        return lhs

    def postfix(self):
        e = self.atom()
        while self.at("."):
            s = self.tok.span
            self.pos += 1
            if self.accept("match"):
                binder = motive = None
                if self.accept("as"):
                    binder = self.binder()
                    if not (self.accept("=>") or self.accept("return")):
                        raise self.error(["'=>'", "'return'"])
                    motive = self.expr()
                self.expect("{")
                cases = self.sep_list("}", self.case)
                e = SMatch(e, binder, motive, cases, s)
            else:
                name = self.ident()
                e = SDot(e, name, self.opt_args(), s)
        return e

    def atom(self):
        t = self.tok
        match t.kind:
            case "ident":
                self.pos += 1
                return SVar(t.text, self.opt_args(), t.span)
            case "hole":
                self.pos += 1
                return SHole(t.span)
            case "num":
                self.pos += 1
                return SNum(int(t.text), t.span)
        if self.accept("Type"):
            return SType(t.span)
        if self.accept("comatch"):
            name = self.ident() if self.tok.kind == "ident" else None
            self.expect("{")
            return SComatch(name, self.sep_list("}", self.cocase), t.span)
        if self.accept("("):
            e = self.expr()
            if self.accept(":"):
                ty = self.expr()
                self.expect(")")
                return SAnn(e, ty, t.span)
            self.expect(")")
            return e
        raise self.error(["identifier", "number", "'_'", "'Type'", "'comatch'", "'('", "'\\'", "'let'"])


def parse(source: str, file: str = "<input>") -> SurfaceProgram:
    return Parser(source, file).program()


def parse_expr(source: str, file: str = "<expr>"):
    p = Parser(source, file)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(["end of input"])
    return e
