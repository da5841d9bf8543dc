"""Desugaring surface programs into core declarations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..core import (
    TYPE,
    Ann,
    Clause,
    Clauses,
    CodataDecl,
    CodefDecl,
    Comatch,
    CtorDecl,
    Ctor,
    DataDecl,
    DefDecl,
    Dtor,
    DtorDecl,
    GlobalEnv,
    Let,
    LetDecl,
    Match,
    Meta,
    Param,
    TyCtor,
    Var,
    free_vars,
    fresh,
    new_label,
)
from ..diagnostics import PolarError
from .ast import (
    SAnn,
    SArg,
    SArrow,
    SCase,
    SCodata,
    SCodef,
    SComatch,
    SData,
    SDef,
    SDot,
    SHole,
    SLambda,
    SLet,
    SLetDecl,
    SMatch,
    SNum,
    SType,
    SurfaceProgram,
    SVar,
)

_hole_counter = itertools.count(1)


def fresh_hole() -> Meta:
    # "i" names never collide with names the metavariable map generates itself
    return Meta(f"i{next(_hole_counter)}", ())


class DesugarError(PolarError):
    pass


@dataclass
class DesugarResult:
    genv: GlobalEnv
    lets: list = field(default_factory=list)  # (name, ty, body)
    desugarer: object = None


@dataclass
class _Sig:
    """Arity information for argument filling: parameter names and implicit flags."""

    names: list
    implicit: list

    @classmethod
    def of(cls, params) -> "_Sig":
        return cls([p.name for p in params], [p.implicit for p in params])


class Desugarer:
    def __init__(self):
        self.types: dict = {}  # name -> SData | SCodata
        self.ctors: dict = {}  # name -> (SData, SCtor)
        self.dtors: dict = {}  # name -> (SCodata, SDtor)
        self.defs: dict = {}  # name -> (SDef, Label, Clauses)
        self.codefs: dict = {}  # name -> (SCodef, Label, Clauses)
        self.lets_visible: set = set()
        self.named_labels: dict = {}  # explicit comatch name -> (cocases, Label)

    # ------------------------------------------------------------ signatures

    def _claim(self, table: dict, name: str, value, span, *others) -> None:
        if name in table or any(name in o for o in others):
            raise DesugarError("DuplicateName", f"{name} is declared twice", span)
        table[name] = value

    def collect(self, decls) -> None:
        for d in decls:
            match d:
                case SData(name=n, ctors=cs):
                    self._claim(self.types, n, d, d.span, self.ctors, self.codefs)
                    for c in cs:
                        self._claim(self.ctors, c.name, (d, c), c.span, self.types, self.codefs)
                case SCodata(name=n, dtors=ds):
                    self._claim(self.types, n, d, d.span, self.ctors, self.codefs)
                    for c in ds:
                        self._claim(self.dtors, c.name, (d, c), c.span, self.defs)
                case SDef(name=n):
                    lab = new_label(n, str(d.span), "def", len(d.params))
                    self._claim(self.defs, n, (d, lab, Clauses()), d.span, self.dtors)
                case SCodef(name=n):
                    lab = new_label(n, str(d.span), "codef", len(d.params))
                    self._claim(self.codefs, n, (d, lab, Clauses()), d.span, self.types, self.ctors)

    # ------------------------------------------------------------ arguments

    def fill(self, args, sig: _Sig, scope, what: str, span) -> tuple:
        """Order positional and named arguments along a telescope, inserting holes for omitted implicits."""
        args = args or []
        named: dict = {}
        positional = []
        for a in args:
            if a.name is None:
                positional.append(a.value)
                continue
            if a.name not in sig.names:
                raise DesugarError("UnknownName", f"{what} has no parameter named {a.name}", span)
            if a.name in named:
                raise DesugarError("DuplicateName", f"parameter {a.name} of {what} is given twice", span)
            named[a.name] = a.value
        remaining = [i for i, n in enumerate(sig.names) if n not in named]
        explicit = [i for i in remaining if not sig.implicit[i]]
        if len(positional) == len(remaining):
            chosen = remaining
        elif len(positional) == len(explicit):
            chosen = explicit
        else:
            want = f"{len(explicit)}" if len(explicit) == len(remaining) else f"{len(explicit)} or {len(remaining)}"
            raise DesugarError("ArityMismatch", f"{what} expects {want} arguments, got {len(positional)}", span)
        out = [None] * len(sig.names)
        for i, v in zip(chosen, positional):
            out[i] = self.expr(v, scope)
        for i, n in enumerate(sig.names):
            if n in named:
                out[i] = self.expr(named[n], scope)
            elif out[i] is None:
                out[i] = fresh_hole()
        return tuple(out)

    # ------------------------------------------------------------ expressions

    def expr(self, e, scope: tuple):
        match e:
            case SVar(name=n, args=None) if n in scope:
                return Var(n)
            case SVar(name=n, args=None) if n in self.lets_visible:
                return Var("@" + n)
            case SVar(name=n, args=args, span=sp):
                if n in scope or n in self.lets_visible:
                    raise DesugarError("ArityMismatch", f"{n} is a variable and cannot take arguments", sp)
                return self.call(n, args, scope, sp)
            case SType():
                return TYPE
            case SHole():
                return fresh_hole()
            case SNum(value=v, span=sp):
                t = self.call("Z", None, scope, sp)
                for _ in range(v):
                    t = self._apply_prepared("S", [t], sp)
                return t
            case SArrow(dom=a, cod=b, span=sp):
                if not isinstance(self.types.get("Fun"), (SData, SCodata)):
                    raise DesugarError("UnknownName", "`->` needs a type named Fun in scope", sp)
                return self.call("Fun", [SArg(a), SArg(b)], scope, sp)
            case SAnn(body=b, ty=t):
                return Ann(self.expr(b, scope), self.expr(t, scope))
            case SLet(name=x, ty=t, bound=s, body=b):
                return Let(x, self.expr(t, scope), self.expr(s, scope), self.expr(b, scope + (x,)))
            case SDot(target=t, name=n, args=args, span=sp):
                return self.dot(self.expr(t, scope), n, args, scope, sp)
            case SMatch():
                return self.local_match(e, scope)
            case SComatch():
                return self.local_comatch(e.name, e.cocases, scope, e.span)
            case SLambda(dtor=d, binders=bs, body=b, span=sp):
                return self.local_comatch(None, [SCase(d, bs, b, sp)], scope, sp)
        raise TypeError(f"not a surface expression: {e!r}")

    def _apply_prepared(self, name: str, args: list, span):
        """Apply a constructor or codefinition to already-desugared explicit arguments."""
        sig = self._head_sig(name, span)
        explicit = [i for i, imp in enumerate(sig.implicit) if not imp]
        if len(args) != len(explicit):
            raise DesugarError("ArityMismatch", f"{name} cannot be used for numerals", span)
        full = [fresh_hole() for _ in sig.names]
        for i, a in zip(explicit, args):
            full[i] = a
        return self._build_head(name, tuple(full))

    def _head_sig(self, name: str, span) -> _Sig:
        if name in self.ctors:
            return _Sig.of(self.ctors[name][1].params)
        if name in self.codefs:
            return _Sig.of(self.codefs[name][0].params)
        if name in self.types:
            return _Sig.of(self.types[name].params)
        raise DesugarError("UnknownName", f"unknown identifier {name}", span)

    def _build_head(self, name: str, args: tuple):
        if name in self.ctors:
            return Ctor(name, args, tuple(p.implicit for p in self.ctors[name][1].params))
        if name in self.codefs:
            d, lab, cs = self.codefs[name]
            return Comatch(lab, tuple(zip(self._param_names(d.params), args)), cs)
        return TyCtor(name, args, tuple(p.implicit for p in self.types[name].params))

    def call(self, name: str, args, scope, span):
        sig = self._head_sig(name, span)
        return self._build_head(name, self.fill(args, sig, scope, name, span))

    def dot(self, target, name: str, args, scope, span):
        if name in self.dtors:
            _, dd = self.dtors[name]
            filled = self.fill(args, _Sig.of(dd.params), scope, "." + name, span)
            return Dtor(target, name, filled, tuple(p.implicit for p in dd.params))
        if name in self.defs:
            d, lab, cs = self.defs[name]
            filled = self.fill(args, _Sig.of(d.params), scope, "." + name, span)
            return Match(target, lab, tuple(zip(self._param_names(d.params), filled)), self._self_name(d), None, cs)
        raise DesugarError("UnknownName", f"unknown destructor or definition .{name}", span)

    # ------------------------------------------------------------ clauses

    def _param_names(self, params) -> list:
        # anonymous parameters get a stable generated name per telescope object
        key = id(params)
        cache = self.__dict__.setdefault("_names", {})
        if key not in cache:
            cache[key] = (params, [fresh("x") if p.name == "_" else p.name for p in params])
        return cache[key][1]

    def _self_name(self, d) -> str:
        key = ("self", id(d))
        cache = self.__dict__.setdefault("_names", {})
        if key not in cache:
            n = d.self_name or "self"
            if n in self._param_names(d.params):
                n = fresh(n)
            cache[key] = (d, n)
        return cache[key][1]

    def _binders(self, c: SCase, params, span, what: str) -> list:
        names = self._param_names(params)
        given = c.binders or []
        explicit = [i for i, p in enumerate(params) if not p.implicit]
        if len(given) == len(params):
            slots = list(range(len(params)))
        elif len(given) == len(explicit):
            slots = explicit
        else:
            raise DesugarError(
                "ArityMismatch", f"{what} {c.name} binds {len(given)} variables, expected {len(params)}", span
            )
        out = [fresh(names[i]) for i in range(len(params))]
        for i, b in zip(slots, given):
            out[i] = fresh(names[i]) if b == "_" else b
        if len(set(out)) != len(out):
            raise DesugarError("DuplicateName", f"{what} {c.name} binds a variable twice", span)
        return out

    def cases(self, cases, scope, kind: str, extra_scope: tuple = ()) -> list:
        out = []
        for c in cases:
            if kind == "case":
                if c.name not in self.ctors:
                    raise DesugarError("UnknownName", f"unknown constructor {c.name} in pattern", c.span)
                params = self.ctors[c.name][1].params
            else:
                if c.name not in self.dtors:
                    raise DesugarError("UnknownName", f"unknown destructor .{c.name} in copattern", c.span)
                params = self.dtors[c.name][1].params
            bs = self._binders(c, params, c.span, "case" if kind == "case" else "cocase")
            body = None if c.body is None else self.expr(c.body, scope + extra_scope + tuple(bs))
            out.append(Clause(c.name, tuple(bs), body))
        return out

    @staticmethod
    def _closure(clauses, scope, self_name=None) -> tuple:
        fv: set = set()
        for c in clauses:
            if c.body is not None:
                fv |= free_vars(c.body) - set(c.binders)
        fv.discard(self_name)
        seen = []
        for n in scope:
            if n in fv and n not in seen:
                seen.append(n)
        return tuple((n, Var(n)) for n in seen)

    def local_match(self, e: SMatch, scope):
        target = self.expr(e.target, scope)
        z = e.motive_binder
        if z is None or z == "_" or z in scope:
            z = fresh(z if z not in (None, "_") else "z")
        motive = None if e.motive is None else self.expr(e.motive, scope + (z,))
        clauses = self.cases(e.cases, scope, "case")
        lab = new_label("match", str(e.span))
        return Match(target, lab, self._closure(clauses, scope), z, motive, Clauses(clauses))

    def local_comatch(self, name, cocases, scope, span):
        self_name = name or "anon"
        if name is None or self_name in scope:
            self_name = fresh(self_name)
        clauses = self.cases(cocases, scope, "cocase", (self_name,))
        lab = self._comatch_label(name, self_name, cocases, span)
        return Comatch(lab, self._closure(clauses, scope, self_name), Clauses(clauses))

    def _comatch_label(self, name, self_name, cocases, span):
        # an explicit name is the label: repeats must spell out the same cocases
        if name is None:
            return new_label(self_name, str(span))
        seen = self.named_labels.get(name)
        if seen is None:
            lab = new_label(name, str(span))
            self.named_labels[name] = (cocases, lab)
            return lab
        if seen[0] != cocases:
            raise DesugarError("DuplicateLabel", f"comatch label {name} is already used for different cocases", span)
        return seen[1]

    # ------------------------------------------------------------ declarations

    def tele(self, params, scope: tuple):
        out = []
        names = self._param_names(params)
        for p, n in zip(params, names):
            out.append(Param(n, self.expr(p.ty, scope), p.implicit))
            scope = scope + (n,)
        return tuple(out), scope

    def _indices_args(self, tname: str, args, scope, span) -> tuple:
        td = self.types.get(tname)
        if td is None:
            raise DesugarError("UnknownName", f"unknown type {tname}", span)
        return self.fill(args, _Sig.of(td.params), scope, tname, span)

    def decl(self, d):
        match d:
            case SData(name=n, params=ps, ctors=cs):
                ix, _ = self.tele(ps, ())
                ctors = []
                for c in cs:
                    args, sc = self.tele(c.params, ())
                    if c.result is None:
                        rargs = self._indices_args(n, None, sc, c.span)
                    else:
                        rname, rargs_s = c.result
                        if rname != n:
                            raise DesugarError("TypeMismatch", f"constructor {c.name} must build {n}, not {rname}", c.span)
                        rargs = self._indices_args(n, rargs_s, sc, c.span)
                    ctors.append(CtorDecl(c.name, args, rargs, c.span))
                return DataDecl(n, ix, tuple(ctors), d.span)
            case SCodata(name=n, params=ps, dtors=ds):
                ix, _ = self.tele(ps, ())
                dtors = []
                for c in ds:
                    args, sc = self.tele(c.params, ())
                    if c.self_type is not None and c.self_type != n:
                        raise DesugarError("TypeMismatch", f"destructor .{c.name} must observe {n}, not {c.self_type}", c.span)
                    self_args = self._indices_args(n, c.self_args, sc, c.span)
                    self_name = self._self_name(c)
                    ret = self.expr(c.ret, sc + (self_name,))
                    dtors.append(DtorDecl(self_name, self_args, c.name, args, ret, c.span))
                return CodataDecl(n, ix, tuple(dtors), d.span)
            case SDef(name=n):
                _, lab, cs = self.defs[n]
                if not isinstance(self.types.get(d.self_type), SData):
                    raise DesugarError("NotData", f"definition .{n} must match on a data type, not {d.self_type}", d.span)
                params, sc = self.tele(d.params, ())
                self_args = self._indices_args(d.self_type, d.self_args, sc, d.span)
                self_name = self._self_name(d)
                ret = self.expr(d.ret, sc + (self_name,))
                cs.items = self.cases(d.cases, sc, "case")
                return DefDecl(n, lab, self_name, d.self_type, self_args, params, ret, cs, d.span)
            case SCodef(name=n):
                _, lab, cs = self.codefs[n]
                if not isinstance(self.types.get(d.type_name), SCodata):
                    raise DesugarError("NotCodata", f"codefinition {n} must build a codata type, not {d.type_name}", d.span)
                params, sc = self.tele(d.params, ())
                type_args = self._indices_args(d.type_name, d.type_args, sc, d.span)
                cs.items = self.cases(d.cocases, sc, "cocase")
                return CodefDecl(n, lab, params, d.type_name, type_args, cs, d.span)
            case SLetDecl(name=n, ty=t, body=b):
                if n in self.lets_visible:
                    raise DesugarError("DuplicateName", f"let {n} is declared twice", d.span)
                decl = LetDecl(n, self.expr(t, ()), self.expr(b, ()), d.span)
                self.lets_visible.add(n)
                return decl
        raise TypeError(f"not a declaration: {d!r}")


def desugar(programs) -> DesugarResult:
    """Desugar one or more parsed files (in order) into a single global environment."""
    if isinstance(programs, SurfaceProgram):
        programs = [programs]
    decls = [d for p in programs for d in p.decls]
    ds = Desugarer()
    ds.collect(decls)
    genv = GlobalEnv()
    lets = []
    for d in decls:
        core = ds.decl(d)
        genv.add(core)
        if isinstance(core, LetDecl):
            lets.append((core.name, core.ty, core.body))
    return DesugarResult(genv, lets, ds)


def desugar_expr(e, program: DesugarResult, scope: tuple = ()):
    """Desugar a standalone expression against an already-desugared program's signatures."""
    return program.desugarer.expr(e, tuple(scope))
