"""Constraint-based conversion checking and metavariable solving."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .core import (
    Ann,
    Comatch,
    Context,
    CtxEntry,
    Ctor,
    Dtor,
    Let,
    Match,
    Meta,
    TyCtor,
    Universe,
    Var,
    alpha_eq,
    free_vars,
    is_var_renaming,
    strip_ann,
    subst_apply,
)
from .eval import DEFAULT_FUEL, Env, WhnfClass, deep_nf, quote, spine_head, whnf, whnf_class
from .metas import MetaMap
from .pretty import show

# ---------------------------------------------------------------- constraints


@dataclass
class TermEq:
    env: Env
    lhs: object
    rhs: object
    reduced: bool = False

    def describe(self) -> str:
        return f"{show(quote(self.lhs, self.env))} ∼ {show(quote(self.rhs, self.env))}"


@dataclass
class ArgsEq:
    env: Env
    lhs: tuple
    rhs: tuple

    def describe(self) -> str:
        ls = ", ".join(show(quote(x, self.env)) for x in self.lhs)
        rs = ", ".join(show(quote(x, self.env)) for x in self.rhs)
        return f"({ls}) ∼args ({rs})"


Constraint = Union[TermEq, ArgsEq]


@dataclass
class UnifState:
    queue: deque = field(default_factory=deque)
    postponed: list = field(default_factory=list)  # [(constraint, frozenset of meta names)]
    metas: MetaMap = field(default_factory=MetaMap)


# ---------------------------------------------------------------- outcomes


@dataclass(frozen=True)
class Ok:
    pass


@dataclass(frozen=True)
class ConvConflict:
    rule: str
    lhs: str
    rhs: str


@dataclass(frozen=True)
class Stuck:
    constraints: tuple  # human-readable descriptions

    @property
    def rule(self) -> str:
        return "UNSOLVED"


ConvResult = Union[Ok, ConvConflict, Stuck]


@dataclass(frozen=True)
class Solved:
    solution: object


@dataclass(frozen=True)
class Postponed:
    blockers: frozenset


@dataclass(frozen=True)
class Failed:
    rule: str


@dataclass(frozen=True)
class Simplified:
    constraint: object


# ---------------------------------------------------------------- occurrences


class OccClass(enum.Enum):
    STRONGLY_RIGID = "srig"
    WEAKLY_RIGID = "wrig"
    FLEXIBLE = "flex"


@dataclass(frozen=True)
class Occurrence:
    kind: str  # "var" | "meta"
    name: str
    cls: OccClass
    path: tuple
    under_metas: tuple = ()
    node: object = None


@dataclass
class Classification:
    occurrences: list

    def vars_with(self, *classes) -> set:
        return {o.name for o in self.occurrences if o.kind == "var" and o.cls in classes}

    @property
    def fv_srig(self) -> set:
        return self.vars_with(OccClass.STRONGLY_RIGID)

    @property
    def fv_rig(self) -> set:
        return self.vars_with(OccClass.STRONGLY_RIGID, OccClass.WEAKLY_RIGID)

    @property
    def fv(self) -> set:
        return {o.name for o in self.occurrences if o.kind == "var"}

    @property
    def fv_flex(self) -> set:
        return self.vars_with(OccClass.FLEXIBLE)

    @property
    def fvm(self) -> set:
        return {o.name for o in self.occurrences if o.kind == "meta"}

    @property
    def fvm_srig(self) -> set:
        return {o.name for o in self.occurrences if o.kind == "meta" and o.cls is OccClass.STRONGLY_RIGID}

    def by_path(self) -> dict:
        return {o.path: o.cls for o in self.occurrences}


def classify(e) -> Classification:
    """Classify every variable and metavariable occurrence of a normal form."""
    out: list = []
    _classify(e, OccClass.STRONGLY_RIGID, frozenset(), (), (), out)
    return Classification(out)


def _weaken(mode: OccClass) -> OccClass:
    return OccClass.FLEXIBLE if mode is OccClass.FLEXIBLE else OccClass.WEAKLY_RIGID


def _classify(t, mode, bound, path, under, out) -> None:
    match t:
        case Var(name=x):
            if x not in bound:
                out.append(Occurrence("var", x, mode, path, under))
        case Universe():
            pass
        case Ann(body=b, ty=ty):
            _classify(b, mode, bound, path + (0,), under, out)
            _classify(ty, _weaken(mode), bound, path + (1,), under, out)
        case Let(name=x, ty=ty, bound=s, body=b):
            _classify(ty, _weaken(mode), bound, path + (0,), under, out)
            _classify(s, _weaken(mode), bound, path + (1,), under, out)
            _classify(b, mode, bound | {x}, path + (2,), under, out)
        case TyCtor(args=args) | Ctor(args=args):
            for i, a in enumerate(args):
                _classify(a, mode, bound, path + (i,), under, out)
        case Comatch(closure=clo):
            for i, (_, v) in enumerate(clo):
                _classify(v, mode, bound, path + (i,), under, out)
        case Dtor() | Match():
            blocked = isinstance(spine_head(t), Meta)
            sub = OccClass.FLEXIBLE if blocked else _weaken(mode)
            head_mode = _weaken(mode)
            if isinstance(t, Dtor):
                _classify_head(t.scrutinee, sub, head_mode, bound, path + (0,), under, out)
                for i, a in enumerate(t.args):
                    _classify(a, sub, bound, path + (i + 1,), under, out)
            else:
                _classify_head(t.scrutinee, sub, head_mode, bound, path + (0,), under, out)
                for i, (_, v) in enumerate(t.closure):
                    _classify(v, sub, bound, path + (i + 1,), under, out)
                if t.motive is not None:
                    _classify(t.motive, sub, bound | {t.motive_binder}, path + ("motive",), under, out)
        case Meta(name=n, delayed=d):
            out.append(Occurrence("meta", n, mode, path, under, t))
            for i, (_, v) in enumerate(d):
                _classify(v, OccClass.FLEXIBLE, bound, path + (i,), under + (n,), out)
        case _:
            raise TypeError(f"not a term: {t!r}")


def _classify_head(h, sub, head_mode, bound, path, under, out) -> None:
    # a metavariable heading a projection spine is weakly rigid (it cannot vanish);
    # everything else follows the spine's mode
    if isinstance(h, Meta):
        out.append(Occurrence("meta", h.name, head_mode, path, under, h))
        for i, (_, v) in enumerate(h.delayed):
            _classify(v, OccClass.FLEXIBLE, bound, path + (i,), under + (h.name,), out)
    else:
        _classify(h, sub, bound, path, under, out)


# ---------------------------------------------------------------- occurs / invert / prune / same


@dataclass(frozen=True)
class OccOk:
    pass


@dataclass(frozen=True)
class OccNo:
    blockers: frozenset


@dataclass(frozen=True)
class OccFail:
    reason: str


def occurs(alpha: str, theta, e):
    """Decide whether ``alpha[theta] ~ e`` may be solved by inversion."""
    if not is_var_renaming(theta):
        return OccNo(frozenset({alpha}))
    img = {v.name for _, v in theta}
    blockers: set = set()
    for o in classify(e).occurrences:
        if o.kind == "meta" and o.name == alpha:
            if o.cls is OccClass.STRONGLY_RIGID:
                return OccFail(f"?{alpha} occurs strongly rigidly in its own solution")
            blockers.add(alpha)
        elif o.kind == "var" and o.name not in img:
            if o.cls is OccClass.FLEXIBLE:
                blockers.update(o.under_metas)
            else:
                return OccFail(f"variable {o.name} is not available to ?{alpha}")
    return OccNo(frozenset(blockers)) if blockers else OccOk()


def invert(alpha: str, theta, e) -> Optional[object]:
    """Apply the inverse of the renaming ``theta`` to ``e``; None if not injective on FV(e)."""
    if not is_var_renaming(theta):
        return None
    fv = free_vars(e)
    inv: dict = {}
    for x, v in theta:
        if v.name in fv:
            if v.name in inv:
                return None
            inv[v.name] = Var(x)
    if not fv <= set(inv):
        return None
    return subst_apply(e, inv)


def _restrict(metas: MetaMap, name: str, keep: list, hint: str) -> Optional[str]:
    """Register a copy of ``name`` over the kept parameters and solve ``name`` with it.

    Returns the new metavariable name, or None if a dropped parameter is
    still needed by a kept type or the metavariable's own type.
    """
    info = metas[name]
    dropped = {e.name for e in info.ctx.entries if e.name not in keep}
    if not dropped:
        return None
    entries = [e for e in info.ctx.entries if e.name in keep]
    for ent in entries:
        if free_vars(ent.ty) & dropped:
            return None
    if free_vars(info.ty) & dropped:
        return None
    new = metas.fresh(Context(entries), info.ty, hint=hint, origin=info.origin)
    new.owner = info.owner
    metas.solve(name, Meta(new.name, tuple((e.name, Var(e.name)) for e in entries)))
    return new.name


def same(metas: MetaMap, alpha: str, theta1, theta2) -> Optional[str]:
    """Intersect two delayed substitutions of one metavariable.

    Returns the restricted metavariable's name when a smaller context was
    recorded, or None when nothing changed.
    """
    if not (is_var_renaming(theta1) and is_var_renaming(theta2)):
        return None
    d2 = dict(theta2)
    keep = [x for x, v in theta1 if x in d2 and d2[x].name == v.name]
    return _restrict(metas, alpha, keep, alpha + "'")


# ---------------------------------------------------------------- the solver


class Solver:
    """One unification session sharing a metavariable map."""

    def __init__(
        self,
        metas: Optional[MetaMap] = None,
        fuel: int = DEFAULT_FUEL,
        trace: Optional[list] = None,
        check_solution: Optional[Callable] = None,
        log_constraints: Optional[list] = None,
    ):
        self.metas = metas if metas is not None else MetaMap()
        self.fuel = fuel
        self.trace = trace
        self.check_solution = check_solution
        self.log_constraints = log_constraints
        self.prune_attempts = 0

    # -- tracing

    def _log(self, rule: str, c=None, detail: str = "") -> None:
        if self.trace is not None:
            entry = {"rule": rule}
            if c is not None:
                entry["constraint"] = c.describe()
            if detail:
                entry["detail"] = detail
            self.trace.append(entry)

    # -- entry points

    def conv(self, ctx: Context, e1, e2) -> ConvResult:
        st = UnifState(metas=self.metas)
        st.queue.append(TermEq(Env(ctx), e1, e2))
        if self.log_constraints is not None:
            self.log_constraints.append((ctx, e1, e2))
        return self.solve_loop(st)

    def conv_args(self, ctx: Context, s1, s2) -> ConvResult:
        st = UnifState(metas=self.metas)
        st.queue.append(ArgsEq(Env(ctx), tuple(s1), tuple(s2)))
        return self.solve_loop(st)

    def solve_loop(self, st: UnifState) -> ConvResult:
        while st.queue:
            c = st.queue.popleft()
            before = self._solved_names()
            res = self._process(c, st)
            if isinstance(res, ConvConflict):
                return res
            if self._solved_names() != before:
                self._wake(st)
        if st.postponed:
            return Stuck(tuple(c.describe() for c, _ in st.postponed))
        return Ok()

    def _solved_names(self) -> int:
        return sum(1 for m in self.metas if m.solution is not None)

    def _wake(self, st: UnifState) -> None:
        keep = []
        for c, blockers in st.postponed:
            if any(not self.metas.is_unsolved(b) and b in self.metas for b in blockers):
                self._log("WAKE", c)
                st.queue.append(c)
            else:
                keep.append((c, blockers))
        st.postponed = keep

    def _postpone(self, st: UnifState, c, blockers) -> None:
        self._log("POSTPONE", c, "blocked on " + ", ".join(sorted("?" + b for b in blockers)))
        st.postponed.append((c, frozenset(blockers)))

    # -- one constraint

    def _process(self, c, st: UnifState):
        if isinstance(c, ArgsEq):
            if len(c.lhs) != len(c.rhs):
                self._log("C-ARITY-BOT", c)
                return ConvConflict("C-ARITY-BOT", c.describe(), "")
            if not c.lhs:
                self._log("C-NIL", c)
                return None
            self._log("C-CONS", c)
            new = [TermEq(c.env, a, b) for a, b in zip(c.lhs, c.rhs)]
            st.queue.extendleft(reversed(new))
            return None

        lhs, rhs, env = c.lhs, c.rhs, c.env
        if alpha_eq(lhs, rhs):
            self._log("CONV-ALPHA", c)
            return None

        if not c.reduced:
            # solve before reducing: a solution found on the unreduced sides is valid
            for m, other in ((strip_ann(lhs), rhs), (strip_ann(rhs), lhs)):
                if isinstance(m, Meta) and self.metas.is_unsolved(m.name):
                    if isinstance(strip_ann(other), Meta) and strip_ann(other).name == m.name:
                        break
                    r = self.solve_one(m.name, m.delayed, other, env, reduced=False)
                    if isinstance(r, Solved):
                        self._log("UNIF-SOLVE", c, f"?{m.name} := {show(r.solution)}")
                        return None
            w1, env = whnf(lhs, env, self.metas, self.fuel)
            w2, env = whnf(rhs, env, self.metas, self.fuel)
            self._log("CONV-RED", c)
            st.queue.appendleft(TermEq(env, w1, w2, reduced=True))
            return None

        w1, w2 = strip_ann(lhs), strip_ann(rhs)

        # metavariable rules
        m1 = w1 if isinstance(w1, Meta) else None
        m2 = w2 if isinstance(w2, Meta) else None
        if m1 is not None and m2 is not None and m1.name == m2.name and self.metas.is_unsolved(m1.name):
            return self._same(c, m1, m2, st)
        for m, other in ((m1, w2), (m2, w1)):
            if m is None or not self.metas.is_unsolved(m.name):
                continue
            r = self.solve_one(m.name, m.delayed, other, env, reduced=True)
            match r:
                case Solved(solution=s):
                    self._log("UNIF-SOLVE", c, f"?{m.name} := {show(s)}")
                    return None
                case Failed(rule=rule):
                    self._log(rule, c)
                    return ConvConflict(rule, show(quote(w1, env)), show(quote(w2, env)))
                case Simplified(constraint=nc):
                    self._log("UNIF-PRUNE", c)
                    st.queue.appendleft(nc)
                    return None
                case Postponed(blockers=b):
                    if m is m1 and m2 is not None and self.metas.is_unsolved(m2.name):
                        continue
                    self._postpone(st, c, b)
                    return None

        k1, k2 = whnf_class(w1), whnf_class(w2)
        if WhnfClass.BLOCKED in (k1, k2):
            blockers = set()
            for w, k in ((w1, k1), (w2, k2)):
                if k is WhnfClass.BLOCKED:
                    blockers.add(spine_head(w).name)
            self._postpone(st, c, blockers)
            return None
        return self._structural(c, w1, w2, env, st)

    def _structural(self, c, w1, w2, env, st):
        def conflict(rule):
            self._log(rule, c)
            return ConvConflict(rule, show(quote(w1, env)), show(quote(w2, env)))

        def decompose(rule, parts):
            self._log(rule, c)
            st.queue.extendleft(reversed(parts))
            return None

        match w1, w2:
            case TyCtor(name=n1, args=a1), TyCtor(name=n2, args=a2):
                if n1 != n2:
                    return conflict("CONV-TCTOR-BOT")
                return decompose("CONV-TCTOR", [ArgsEq(env, a1, a2)])
            case Ctor(name=n1, args=a1), Ctor(name=n2, args=a2):
                if n1 != n2:
                    return conflict("CONV-DCTOR-BOT")
                return decompose("CONV-DCTOR", [ArgsEq(env, a1, a2)])
            case Comatch(label=l1, closure=c1), Comatch(label=l2, closure=c2):
                if l1 != l2:
                    return conflict("CONV-COMATCH-BOT")
                return decompose("CONV-COMATCH", [ArgsEq(env, tuple(v for _, v in c1), tuple(v for _, v in c2))])
            case Dtor(scrutinee=h1, name=d1, args=a1), Dtor(scrutinee=h2, name=d2, args=a2):
                if d1 != d2:
                    return conflict("CONV-DTOR-BOT")
                return decompose("CONV-DTOR", [TermEq(env, h1, h2, reduced=True), ArgsEq(env, a1, a2)])
            case Match(label=l1) as x1, Match(label=l2) as x2:
                if l1 != l2:
                    return conflict("CONV-MATCH-BOT")
                return decompose(
                    "CONV-MATCH",
                    [
                        TermEq(env, x1.scrutinee, x2.scrutinee, reduced=True),
                        ArgsEq(env, tuple(v for _, v in x1.closure), tuple(v for _, v in x2.closure)),
                    ],
                )
            case Var(), Var():
                return conflict("CONV-VAR-BOT")
            case (Universe(), _) | (_, Universe()):
                return conflict("CONV-TYPE-BOT")
            case (Meta(), _) | (_, Meta()):
                # unregistered metavariables never get solved
                self._postpone(st, c, {m.name for m in (w1, w2) if isinstance(m, Meta)})
                return None
        return conflict("CONV-HEAD-BOT")

    def _same(self, c, m1: Meta, m2: Meta, st):
        th1 = tuple((k, deep_nf(v, c.env, self.metas, self.fuel)) for k, v in m1.delayed)
        th2 = tuple((k, deep_nf(v, c.env, self.metas, self.fuel)) for k, v in m2.delayed)
        if alpha_eq(Meta(m1.name, th1), Meta(m2.name, th2)):
            self._log("CONV-ALPHA", c)
            return None
        if not (is_var_renaming(th1) and is_var_renaming(th2)):
            self._postpone(st, c, {m1.name})
            return None
        new = same(self.metas, m1.name, th1, th2)
        if new is None:
            self._postpone(st, c, {m1.name})
            return None
        self._log("UNIF-PRUNE-SAME", c, f"?{m1.name} := ?{new}[...]")
        return None

    # -- solving a single constraint

    def solve_one(self, alpha: str, theta, rhs, env: Env, reduced: bool = True):
        """Try to solve ``alpha[theta] ~ rhs``."""
        if reduced:
            th = tuple((k, deep_nf(v, env, self.metas, self.fuel)) for k, v in theta)
            e = deep_nf(rhs, env, self.metas, self.fuel)
        else:
            th = tuple((k, quote(v, env)) for k, v in theta)
            e = quote(rhs, env)
        if not is_var_renaming(th):
            return Postponed(frozenset({alpha}))
        if reduced:
            e2 = self.prune(th, e, env.ctx, avoid=alpha)
            if e2 is not e:
                return Simplified(TermEq(env, Meta(alpha, th), e2, reduced=False))
        occ = occurs(alpha, th, e)
        if isinstance(occ, OccFail):
            return Failed("UNIF-OCCURS-RIG")
        if isinstance(occ, OccNo):
            return Postponed(occ.blockers)
        target, th_used = alpha, th
        sol = invert(alpha, th, e)
        if sol is None:
            return Postponed(frozenset({alpha}))
        if not _linear(th):
            # prune alpha to the entries whose image occurs in the right-hand side
            fv = free_vars(e)
            keep = [x for x, v in th if v.name in fv]
            pruned = _restrict(self.metas, alpha, keep, alpha + "'")
            if pruned is not None:
                target = pruned
                th_used = tuple((x, v) for x, v in th if x in keep)
                sol = invert(target, th_used, e)
                if sol is None:
                    return Postponed(frozenset({target}))
        info = self.metas[target]
        if self.check_solution is not None:
            verdict = self.check_solution(info, sol)
            if verdict is False:
                return Failed("UNIF-SOLVE-ILL-TYPED")
        if not self.metas.is_unsolved(target):
            return Simplified(TermEq(env, Meta(alpha, theta), rhs))
        self.metas.solve(target, sol)
        return Solved(sol)

    def prune(self, theta, e, ctx: Context, avoid: str):
        """Restrict metavariables in rigid positions of ``e`` that mention variables outside img(theta).

        Returns ``e`` itself when nothing was pruned, otherwise the renormalized term.
        """
        img = {v.name for _, v in theta}
        changed = False
        for o in classify(e).occurrences:
            if o.kind != "meta" or o.under_metas or o.cls is OccClass.FLEXIBLE or o.name == avoid:
                continue
            if not self.metas.is_unsolved(o.name) or o.node is None:
                continue
            keep = []
            for x, t in o.node.delayed:
                cl = classify(t)
                bad_rigid = cl.fv_rig - img
                bad_flex = cl.fv_flex - img
                if bad_rigid and not bad_flex:
                    continue
                keep.append(x)
            if len(keep) < len(o.node.delayed):
                self.prune_attempts += 1
                if _restrict(self.metas, o.name, keep, o.name + "'") is not None:
                    changed = True
        if not changed:
            return e
        return deep_nf(e, Env(ctx), self.metas, self.fuel)


def _linear(theta) -> bool:
    names = [v.name for _, v in theta]
    return len(names) == len(set(names))


def conv(ctx: Context, e1, e2, metas: Optional[MetaMap] = None, fuel: int = DEFAULT_FUEL, trace: Optional[list] = None) -> ConvResult:
    return Solver(metas, fuel, trace).conv(ctx, e1, e2)
