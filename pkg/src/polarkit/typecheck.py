"""Bidirectional elaboration: inference, checking, dependent (co)case checking, program well-formedness."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    TYPE,
    Ann,
    Clause,
    Clauses,
    CodataDecl,
    CodefDecl,
    Comatch,
    Context,
    CtorDecl,
    CtxEntry,
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
    Universe,
    Var,
    free_vars,
    fresh,
    instantiate_clause,
    rename,
    rename_tele,
    strip_ann,
    subst_apply,
    subst_args,
)
from .diagnostics import Diagnostic, PolarError
from .eval import DEFAULT_FUEL, EvalError, Env, quote, whnf
from .index_unify import Conflict, Fail, Unifier, unify_idx_args
from .metas import MetaMap
from .pretty import show
from .unifier import ConvConflict, Ok, Solver, Stuck


class CheckError(PolarError):
    pass


def ctx_subst(ctx: Context, theta) -> Context:
    """Apply ``theta`` to every type and body; domain variables become marked let-bindings."""
    m = dict(theta)
    if not m:
        return ctx
    out = []
    for e in ctx.entries:
        ty = subst_apply(e.ty, m)
        if e.name in m:
            out.append(CtxEntry(e.name, ty, m[e.name], True))
        else:
            body = None if e.body is None else subst_apply(e.body, m)
            out.append(CtxEntry(e.name, ty, body, e.marked))
    return Context(out)


def zonk(t, metas: MetaMap, memo: Optional[dict] = None):
    """Inline every solved metavariable, including inside local (co)match bodies."""
    if memo is None:
        memo = {}

    def sol_of(n):
        key = ("sol", n)
        if key not in memo:
            memo[key] = z(metas.solution(n))
        return memo[key]

    def z(t):
        match t:
            case Var() | Universe():
                return t
            case Meta(name=n, delayed=d):
                d2 = tuple((k, z(v)) for k, v in d)
                if metas.solution(n) is None:
                    return Meta(n, d2)
                return subst_apply(sol_of(n), dict(d2))
            case Ann(body=b, ty=ty):
                return Ann(z(b), z(ty))
            case Let(name=x, ty=ty, bound=s, body=b):
                return Let(x, z(ty), z(s), z(b))
            case TyCtor(name=n, args=a, implicit=imp):
                return TyCtor(n, tuple(z(x) for x in a), imp)
            case Ctor(name=n, args=a, implicit=imp):
                return Ctor(n, tuple(z(x) for x in a), imp)
            case Dtor(scrutinee=s, name=n, args=a, implicit=imp):
                return Dtor(z(s), n, tuple(z(x) for x in a), imp)
            case Match(scrutinee=s, label=lab, closure=clo, motive_binder=mb, motive=mo, cases=cs):
                return Match(
                    z(s),
                    lab,
                    tuple((k, z(v)) for k, v in clo),
                    mb,
                    None if mo is None else z(mo),
                    cs if lab.is_global else zc(cs),
                )
            case Comatch(label=lab, closure=clo, cocases=cs):
                return Comatch(lab, tuple((k, z(v)) for k, v in clo), cs if lab.is_global else zc(cs))
        raise TypeError(f"not a term: {t!r}")

    def zc(cs: Clauses) -> Clauses:
        key = id(cs)
        if key in memo:
            return memo[key]
        new = Clauses()
        memo[key] = new
        new.items = [Clause(c.name, c.binders, None if c.body is None else z(c.body)) for c in cs.items]
        return new

    return z(t)


def zonk_clauses(cs: Clauses, metas: MetaMap) -> list:
    memo: dict = {}
    return [Clause(c.name, c.binders, None if c.body is None else zonk(c.body, metas, memo)) for c in cs.items]


@dataclass
class CheckResult:
    genv: GlobalEnv
    globals: Context
    metas: MetaMap
    diagnostics: list = field(default_factory=list)
    checker: Optional["Checker"] = None

    @property
    def ok(self) -> bool:
        return not self.diagnostics


class Checker:
    """Typechecking state for one program: metavariables, top-level lets, pending constraints."""

    def __init__(
        self,
        genv: GlobalEnv,
        metas: Optional[MetaMap] = None,
        fuel: int = DEFAULT_FUEL,
        conv_trace: Optional[list] = None,
        unify_trace: Optional[list] = None,
        record_constraints: bool = False,
    ):
        self.genv = genv
        self.metas = metas if metas is not None else MetaMap()
        self.fuel = fuel
        self.globals = Context()
        self.unify_trace = unify_trace
        self.constraint_log: Optional[list] = [] if record_constraints else None
        self.solver = Solver(self.metas, fuel, conv_trace, self._check_solution, self.constraint_log)
        self.pending: list = []
        self._solution_depth = 0

    # ------------------------------------------------------------ helpers

    def base(self) -> Context:
        return self.globals

    def normalize_type(self, ctx: Context, t):
        w, env = whnf(t, Env(ctx), self.metas, self.fuel)
        return strip_ann(quote(w, env))

    def _meta_context(self, ctx: Context):
        """Parameter-only context for a new metavariable, plus the unfolding of bodied entries."""
        n0 = len(self.globals)
        unfold: dict = {}
        entries = list(ctx.entries[:n0])
        for e in ctx.entries[n0:]:
            if e.body is not None:
                unfold[e.name] = subst_apply(e.body, unfold)
            else:
                entries.append(CtxEntry(e.name, subst_apply(e.ty, unfold)))
        return Context(entries), unfold

    def _binder(self, ctx: Context, x: str, *bodies):
        if x not in ctx:
            return (x, *bodies)
        x2 = fresh(x)
        return (x2, *(None if b is None else rename(b, {x: x2}) for b in bodies))

    def conv(self, ctx: Context, inferred, expected) -> None:
        r = self.solver.conv(ctx, inferred, expected)
        match r:
            case Ok():
                return
            case ConvConflict(rule=rule, lhs=lhs, rhs=rhs):
                raise CheckError(
                    "TypeMismatch",
                    f"type mismatch: expected {show(zonk(expected, self.metas))}, "
                    f"found {show(zonk(inferred, self.metas))}",
                    notes=[f"rule: {rule}", f"while comparing {lhs} with {rhs}"],
                )
            case Stuck():
                self.pending.append((ctx, inferred, expected))

    def _check_solution(self, info, sol) -> Optional[bool]:
        if self._solution_depth > 8:
            return None
        self._solution_depth += 1
        try:
            self.check(info.ctx, sol, info.ty)
            return True
        except CheckError:
            return False
        except EvalError:
            return None
        finally:
            self._solution_depth -= 1

    # ------------------------------------------------------------ inference

    def infer(self, ctx: Context, e):
        """Return (elaborated term, inferred type)."""
        match e:
            case Var(name=x):
                ent = ctx.lookup(x)
                if ent is None:
                    raise CheckError("UnknownName", f"unknown variable {show(e)}")
                return e, ent.ty
            case Universe():
                return e, TYPE
            case Ann(body=b, ty=ty):
                ty2 = self.check(ctx, ty, TYPE)
                b2 = self.check(ctx, b, ty2)
                return Ann(b2, ty2), ty2
            case Let(name=x, ty=ty, bound=s, body=b):
                ty2 = self.check(ctx, ty, TYPE)
                s2 = self.check(ctx, s, ty2)
                x2, b = self._binder(ctx, x, b)
                b2, t = self.infer(ctx.extend(x2, ty2, s2), b)
                if x2 in free_vars(t):
                    t = subst_apply(t, {x2: s2})
                if x2 in free_vars(t):
                    raise CheckError("ScopeEscape", f"let-bound {x} escapes in type {show(t)}")
                return Let(x2, ty2, s2, b2), t
            case TyCtor(name=n, args=args):
                decl = self.genv.types.get(n)
                if decl is None:
                    raise CheckError("UnknownName", f"unknown type {n}")
                args2 = self.check_subst(ctx, args, decl.indices, what=n)
                return TyCtor(n, args2, e.implicit), TYPE
            case Ctor(name=n, args=args):
                if n not in self.genv.ctors:
                    raise CheckError("UnknownName", f"unknown constructor {n}")
                dd, cd = self.genv.ctors[n]
                args2 = self.check_subst(ctx, args, cd.args, what=n)
                m = {p.name: a for p, a in zip(cd.args, args2)}
                return Ctor(n, args2, e.implicit), TyCtor(dd.name, subst_args(cd.result_args, m))
            case Dtor(scrutinee=s, name=n, args=args):
                if n not in self.genv.dtors:
                    raise CheckError("UnknownName", f"unknown destructor {n}")
                cd, dd = self.genv.dtors[n]
                args2 = self.check_subst(ctx, args, dd.args, what="." + n)
                m = {p.name: a for p, a in zip(dd.args, args2)}
                s2 = self.check(ctx, s, TyCtor(cd.name, subst_args(dd.self_args, m)))
                ret = subst_apply(dd.ret, {**m, dd.self_name: s2})
                return Dtor(s2, n, args2, e.implicit), ret
            case Match(label=lab) if lab.kind == "def":
                d = self.genv.def_by_label(lab)
                if d is None:
                    raise CheckError("UnknownName", f"unknown definition {lab.name}")
                args2 = self.check_subst(ctx, [v for _, v in e.closure], d.params, what="." + d.name)
                m = {p.name: a for p, a in zip(d.params, args2)}
                s2 = self.check(ctx, e.scrutinee, TyCtor(d.self_type, subst_args(d.self_args, m)))
                ret = subst_apply(d.ret, {**m, d.self_name: s2})
                clo = tuple((p.name, a) for p, a in zip(d.params, args2))
                return Match(s2, lab, clo, d.self_name, None, d.cases), ret
            case Comatch(label=lab) if lab.kind == "codef":
                d = self.genv.codef_by_label(lab)
                if d is None:
                    raise CheckError("UnknownName", f"unknown codefinition {lab.name}")
                args2 = self.check_subst(ctx, [v for _, v in e.closure], d.params, what=d.name)
                m = {p.name: a for p, a in zip(d.params, args2)}
                clo = tuple((p.name, a) for p, a in zip(d.params, args2))
                return Comatch(lab, clo, d.cocases), TyCtor(d.type_name, subst_args(d.type_args, m))
            case Match(motive=None):
                raise CheckError("CannotInfer", "cannot infer the type of a match without a motive; add `as z => t`")
            case Match():
                return self.check_match(ctx, e, None)
            case Comatch():
                raise CheckError("CannotInfer", "cannot infer the type of a comatch; annotate it with `(e : T)`")
            case Meta(name=n, delayed=d):
                info = self.metas.get(n)
                if info is None:
                    raise CheckError("CannotInfer", "cannot infer the type of a hole `_` here")
                return e, subst_apply(info.ty, dict(d))
        raise TypeError(f"not a term: {e!r}")

    # ------------------------------------------------------------ checking

    def check(self, ctx: Context, e, ty):
        """Return the elaborated term; raise CheckError if ``e`` does not have type ``ty``."""
        match e:
            case Meta(name=n) if n not in self.metas:
                mctx, unfold = self._meta_context(ctx)
                self.metas.register(n, mctx, subst_apply(ty, unfold))
                n0 = len(self.globals)
                return Meta(n, tuple((ent.name, Var(ent.name)) for ent in mctx.entries[n0:]))
            case Comatch(label=lab) if not lab.is_global:
                return self.check_comatch(ctx, e, ty)
            case Match(label=lab) if not lab.is_global:
                elab, _ = self.check_match(ctx, e, ty)
                return elab
            case Let(name=x, ty=lty, bound=s, body=b):
                ty2 = self.check(ctx, lty, TYPE)
                s2 = self.check(ctx, s, ty2)
                x2, b = self._binder(ctx, x, b)
                b2 = self.check(ctx.extend(x2, ty2, s2), b, ty)
                return Let(x2, ty2, s2, b2)
        e2, t = self.infer(ctx, e)
        self.conv(ctx, t, ty)
        return e2

    def check_subst(self, ctx: Context, args, tele, what: str = "call"):
        if len(args) != len(tele):
            raise CheckError("ArityMismatch", f"{what} expects {len(tele)} arguments, got {len(args)}")
        m: dict = {}
        out = []
        for a, p in zip(args, tele):
            a2 = self.check(ctx, a, subst_apply(p.ty, m))
            m[p.name] = a2
            out.append(a2)
        return tuple(out)

    def check_tele(self, ctx: Context, tele):
        """Return (elaborated telescope, extended context)."""
        out = []
        for p in tele:
            ty2 = self.check(ctx, p.ty, TYPE)
            out.append(Param(p.name, ty2, p.implicit))
            ctx = ctx.extend(p.name, ty2)
        return tuple(out), ctx

    # ------------------------------------------------------------ (co)matches

    def _coverage(self, cases: Clauses, names: list, what: str, owner: str) -> None:
        seen = set()
        for c in cases.items:
            if c.name in seen:
                raise CheckError("DuplicateCase", f"{what} {c.name} is handled twice in {owner}")
            if c.name not in names:
                raise CheckError("UnknownName", f"{c.name} is not a {what} of {owner}")
            seen.add(c.name)
        missing = [n for n in names if n not in seen]
        if missing:
            raise CheckError("NonExhaustive", f"missing {what}s in {owner}: " + ", ".join(missing))

    def _unify(self, rho1, rho2, ctx):
        return unify_idx_args(rho1, rho2, ctx, self.metas, self.fuel, self.unify_trace)

    def check_cases(self, ctx: Context, dd: DataDecl, rho2, closure, cases: Clauses, z: str, motive, expected) -> list:
        """Check every constructor case; returns elaborated clauses scoped over ``ctx`` plus binders."""
        self._coverage(cases, [c.name for c in dd.ctors], "constructor", dd.name)
        out = []
        for cd in dd.ctors:
            clause = cases.find(cd.name)
            names, body = instantiate_clause(clause, closure, avoid=ctx.names())
            if len(names) != len(cd.args):
                raise CheckError("ArityMismatch", f"case {cd.name} binds {len(names)} variables, expected {len(cd.args)}")
            rn = {p.name: Var(n) for p, n in zip(cd.args, names)}
            xi = rename_tele(cd.args, list(names))
            ctx2 = ctx.extend_tele(xi)
            rho1 = subst_args(cd.result_args, rn)
            r = self._unify(rho1, rho2, ctx2)
            match r:
                case Unifier(subst=theta):
                    if body is None:
                        raise CheckError(
                            "CaseReachable",
                            f"case {cd.name} is marked absurd but is reachable",
                            notes=["index unification succeeded with " + _show_subst(theta)],
                        )
                    if motive is not None:
                        head = Ctor(cd.name, tuple(Var(n) for n in names), tuple(p.implicit for p in cd.args))
                        target = subst_apply(subst_apply(motive, {z: head}), theta)
                    else:
                        target = subst_apply(expected, theta)
                    body2 = self.check(ctx_subst(ctx2, theta), subst_apply(body, theta), target)
                    out.append(Clause(cd.name, names, body2))
                case Conflict(rule=rule):
                    if body is not None:
                        raise CheckError(
                            "CaseImpossible",
                            f"case {cd.name} is impossible for the scrutinee's indices; mark it absurd",
                            notes=[f"index unification: {rule}"],
                        )
                    out.append(Clause(cd.name, names, None))
                case Fail(reason=reason):
                    raise CheckError("IndexUnificationFailed", f"cannot decide index unification for case {cd.name}", notes=[reason])
        return out

    def _reabstract(self, ctx: Context, clauses: list, self_name: Optional[str] = None):
        fv: set = set()
        for c in clauses:
            if c.body is not None:
                fv |= free_vars(c.body) - set(c.binders)
        fv.discard(self_name)
        n0 = len(self.globals)
        closure = tuple((ent.name, Var(ent.name)) for ent in ctx.entries[n0:] if ent.name in fv)
        return closure, Clauses(clauses)

    def check_match(self, ctx: Context, e: Match, expected):
        """Return (elaborated match, its type)."""
        s2, st = self.infer(ctx, e.scrutinee)
        w = self.normalize_type(ctx, st)
        dd = self.genv.data(w.name) if isinstance(w, TyCtor) else None
        if dd is None:
            raise CheckError("NotData", f"cannot match on a value of type {show(zonk(w, self.metas))}")
        z, motive = e.motive_binder, e.motive
        motive2 = None
        if motive is not None:
            z, motive = self._binder(ctx, z, motive)
            motive2 = self.check(ctx.extend(z, w), motive, TYPE)
        elif expected is None:
            raise CheckError("CannotInfer", "cannot infer the type of a match without a motive")
        clauses = self.check_cases(ctx, dd, w.args, e.closure, e.cases, z, motive2, expected)
        closure, cases = self._reabstract(ctx, clauses)
        elab = Match(s2, e.label, closure, z, motive2, cases)
        if motive2 is None:
            return elab, expected
        result = subst_apply(motive2, {z: s2})
        if expected is not None:
            self.conv(ctx, result, expected)
        return elab, result

    def check_cocases(self, ctx: Context, cm: Comatch, w: TyCtor, cd: CodataDecl):
        """Return (elaborated cocases, self variable name, context with the self binding)."""
        self._coverage(cm.cocases, [d.name for d in cd.dtors], "destructor", cd.name)
        sname = cm.label.name if cm.label.name not in ctx else fresh(cm.label.name)
        ctx1 = ctx.extend(sname, w, cm)
        out = []
        for dd in cd.dtors:
            clause = cm.cocases.find(dd.name)
            names, body = instantiate_clause(clause, cm.closure, avoid=ctx1.names(), extra={cm.label.name: Var(sname)})
            if len(names) != len(dd.args):
                raise CheckError("ArityMismatch", f"cocase .{dd.name} binds {len(names)} variables, expected {len(dd.args)}")
            rn = {p.name: Var(n) for p, n in zip(dd.args, names)}
            xi = rename_tele(dd.args, list(names))
            ctx2 = ctx1.extend_tele(xi)
            rho1 = subst_args(dd.self_args, rn)
            r = self._unify(rho1, w.args, ctx2)
            match r:
                case Unifier(subst=theta):
                    if body is None:
                        raise CheckError(
                            "CaseReachable",
                            f"cocase .{dd.name} is marked absurd but is reachable",
                            notes=["index unification succeeded with " + _show_subst(theta)],
                        )
                    target = subst_apply(dd.ret, {**rn, dd.self_name: Var(sname)})
                    body2 = self.check(ctx_subst(ctx2, theta), subst_apply(body, theta), subst_apply(target, theta))
                    out.append(Clause(dd.name, names, body2))
                case Conflict(rule=rule):
                    if body is not None:
                        raise CheckError(
                            "CaseImpossible",
                            f"cocase .{dd.name} is impossible for this type's indices; mark it absurd",
                            notes=[f"index unification: {rule}"],
                        )
                    out.append(Clause(dd.name, names, None))
                case Fail(reason=reason):
                    raise CheckError("IndexUnificationFailed", f"cannot decide index unification for cocase .{dd.name}", notes=[reason])
        return out, sname

    def _codata_of(self, ctx: Context, ty):
        w = self.normalize_type(ctx, ty)
        cd = self.genv.codata(w.name) if isinstance(w, TyCtor) else None
        if cd is None:
            raise CheckError("NotCodata", f"a comatch cannot have type {show(zonk(w, self.metas))}")
        return w, cd

    def check_comatch(self, ctx: Context, e: Comatch, ty):
        w, cd = self._codata_of(ctx, ty)
        clauses, sname = self.check_cocases(ctx, e, w, cd)
        closure, cases = self._reabstract(ctx, clauses, sname)
        label = e.label if sname == e.label.name else dataclasses.replace(e.label, name=sname)
        return Comatch(label, closure, cases)


def _show_subst(theta) -> str:
    return "[" + ", ".join(f"{k} ↦ {show(v)}" for k, v in theta) + "]" if theta else "[]"


# ---------------------------------------------------------------- programs


def _decl_title(d) -> str:
    match d:
        case DataDecl(name=n):
            return f"data {n}"
        case CodataDecl(name=n):
            return f"codata {n}"
        case DefDecl(name=n, self_type=t):
            return f"def {t}.{n}"
        case CodefDecl(name=n):
            return f"codef {n}"
        case LetDecl(name=n):
            return f"let {n}"
    return "declaration"


class ProgramChecker:
    """Checks declarations in order: all signatures first, then all bodies."""

    def __init__(self, genv: GlobalEnv, checker: Checker):
        self.genv = genv
        self.ck = checker
        self.diagnostics: list = []
        self.failed: set = set()

    def run(self) -> None:
        for d in list(self.genv.decls):
            if not isinstance(d, LetDecl):
                self._guard(d, "sig", self._signature)
        # signatures have been replaced by their elaborated versions by now
        for d in list(self.genv.decls):
            if _decl_title(d) not in self.failed:
                self._guard(d, "body", self._body)

    def _guard(self, d, phase: str, fn) -> None:
        ck = self.ck
        owner = f"{phase}:{_decl_title(d)}:{id(d)}"
        ck.metas.owner = owner
        ck.pending = []
        try:
            fn(d, owner)
        except (PolarError, EvalError) as err:
            self.failed.add(_decl_title(d))
            if isinstance(err, PolarError):
                diag = err.diagnostic()
                if diag.span is None:
                    diag = dataclasses.replace(diag, span=d.span)
            else:
                diag = Diagnostic(err.code, str(err), d.span)
            notes = (*diag.notes, f"in {_decl_title(d)}")
            self.diagnostics.append(dataclasses.replace(diag, notes=notes))
        finally:
            ck.metas.owner = None

    def _freeze(self, owner: str) -> None:
        ck = self.ck
        while ck.pending:
            before = sum(1 for m in ck.metas if m.solution is not None)
            pending, ck.pending = ck.pending, []
            for ctx, a, b in pending:
                ck.conv(ctx, a, b)
            after = sum(1 for m in ck.metas if m.solution is not None)
            if after == before and len(ck.pending) == len(pending):
                break
        if ck.pending:
            notes = [f"{show(zonk(a, ck.metas))} ≟ {show(zonk(b, ck.metas))}" for _, a, b in ck.pending]
            raise CheckError("UnsolvedConstraints", "unsolved constraints remain", notes=notes)
        unsolved = ck.metas.unsolved(owner)
        if unsolved:
            notes = [f"?{m.name} : {show(zonk(m.ty, ck.metas))}" for m in unsolved]
            raise CheckError("UnsolvedMeta", "could not infer an implicit argument or hole", notes=notes)

    def _z(self, t):
        return zonk(t, self.ck.metas)

    def _zt(self, tele):
        return tuple(Param(p.name, self._z(p.ty), p.implicit) for p in tele)

    def _signature(self, d, owner: str) -> None:
        ck = self.ck
        base = ck.base()
        match d:
            case DataDecl(name=n, indices=ix, ctors=ctors):
                ix2, _ = ck.check_tele(base, ix)
                new_ctors = []
                for c in ctors:
                    args2, cctx = ck.check_tele(base, c.args)
                    res2 = ck.check_subst(cctx, c.result_args, ix2, what=n)
                    new_ctors.append((c, args2, res2))
                self._freeze(owner)
                new = DataDecl(
                    n,
                    self._zt(ix2),
                    tuple(CtorDecl(c.name, self._zt(a), tuple(self._z(r) for r in res), c.span) for c, a, res in new_ctors),
                    d.span,
                )
            case CodataDecl(name=n, indices=ix, dtors=dtors):
                ix2, _ = ck.check_tele(base, ix)
                new_dtors = []
                for c in dtors:
                    args2, dctx = ck.check_tele(base, c.args)
                    self_args2 = ck.check_subst(dctx, c.self_args, ix2, what=n)
                    ret2 = ck.check(dctx.extend(c.self_name, TyCtor(n, self_args2)), c.ret, TYPE)
                    new_dtors.append((c, args2, self_args2, ret2))
                self._freeze(owner)
                new = CodataDecl(
                    n,
                    self._zt(ix2),
                    tuple(
                        DtorDecl(c.self_name, tuple(self._z(s) for s in sa), c.name, self._zt(a), self._z(r), c.span)
                        for c, a, sa, r in new_dtors
                    ),
                    d.span,
                )
            case DefDecl():
                td = self.genv.data(d.self_type)
                if td is None:
                    raise CheckError("NotData", f"definitions match on data types; {d.self_type} is not one")
                ps2, pctx = ck.check_tele(base, d.params)
                sa2 = ck.check_subst(pctx, d.self_args, td.indices, what=d.self_type)
                ret2 = ck.check(pctx.extend(d.self_name, TyCtor(d.self_type, sa2)), d.ret, TYPE)
                self._freeze(owner)
                new = dataclasses.replace(d, params=self._zt(ps2), self_args=tuple(self._z(s) for s in sa2), ret=self._z(ret2))
            case CodefDecl():
                td = self.genv.codata(d.type_name)
                if td is None:
                    raise CheckError("NotCodata", f"codefinitions build codata; {d.type_name} is not a codata type")
                ps2, pctx = ck.check_tele(base, d.params)
                ta2 = ck.check_subst(pctx, d.type_args, td.indices, what=d.type_name)
                self._freeze(owner)
                new = dataclasses.replace(d, params=self._zt(ps2), type_args=tuple(self._z(s) for s in ta2))
            case _:
                return
        self.genv.replace(d, new)

    def _body(self, d, owner: str) -> None:
        ck = self.ck
        base = ck.base()
        match d:
            case DefDecl():
                td = self.genv.data(d.self_type)
                pctx = base.extend_tele(d.params)
                closure = tuple((p.name, Var(p.name)) for p in d.params)
                clauses = ck.check_cases(pctx, td, d.self_args, closure, d.cases, d.self_name, d.ret, None)
                self._freeze(owner)
                d.cases.items = zonk_clauses(Clauses(clauses), ck.metas)
            case CodefDecl():
                td = self.genv.codata(d.type_name)
                pctx = base.extend_tele(d.params)
                cm = Comatch(d.label, tuple((p.name, Var(p.name)) for p in d.params), d.cocases)
                clauses, _ = ck.check_cocases(pctx, cm, TyCtor(d.type_name, d.type_args), td)
                self._freeze(owner)
                d.cocases.items = zonk_clauses(Clauses(clauses), ck.metas)
            case LetDecl(name=n, ty=ty, body=b):
                ty2 = ck.check(base, ty, TYPE)
                b2 = ck.check(base, b, ty2)
                self._freeze(owner)
                new = LetDecl(n, self._z(ty2), self._z(b2), d.span)
                self.genv.replace(d, new)
                ck.globals = ck.globals.extend(global_name(n), new.ty, new.body)


def global_name(n: str) -> str:
    return "@" + n


def check_program(
    genv: GlobalEnv,
    fuel: int = DEFAULT_FUEL,
    conv_trace: Optional[list] = None,
    unify_trace: Optional[list] = None,
    record_constraints: bool = False,
) -> CheckResult:
    """Check (and elaborate in place) every declaration; diagnostics are accumulated."""
    ck = Checker(genv, fuel=fuel, conv_trace=conv_trace, unify_trace=unify_trace, record_constraints=record_constraints)
    pc = ProgramChecker(genv, ck)
    pc.run()
    return CheckResult(genv, ck.globals, ck.metas, pc.diagnostics, ck)


wf_program = check_program
