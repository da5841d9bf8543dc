"""Call-by-name environment machine: single steps, weak head normal forms, quotation."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Optional

from .core import (
    Ann,
    Comatch,
    Context,
    Ctor,
    Dtor,
    Let,
    Match,
    Meta,
    TyCtor,
    Universe,
    Var,
    free_vars,
    fresh,
    strip_ann,
    subst_apply,
)
from .metas import MetaMap

DEFAULT_FUEL = 1_000_000


class EvalError(Exception):
    code = "EvalError"


class FuelExhausted(EvalError):
    code = "FuelExhausted"

    def __init__(self, budget: int):
        super().__init__(f"reduction did not reach a weak head normal form within {budget} steps")
        self.budget = budget


class StuckAbsurd(EvalError):
    code = "StuckAbsurd"


class MissingCase(EvalError):
    code = "MissingCase"


@dataclass(frozen=True)
class Binding:
    kind: str  # "val" | "comatch" | "subst"
    term: object


class Env:
    """Context prefix plus append-only bindings.

    Bound names are always fresh, so extending shares the underlying store:
    weakening to a longer environment is a no-op.
    """

    __slots__ = ("ctx", "binds")

    def __init__(self, ctx: Context, binds: Optional[dict] = None):
        self.ctx = ctx
        self.binds: dict = {} if binds is None else binds

    def bind(self, kind: str, term, base: str) -> str:
        name = fresh(base)
        self.binds[name] = Binding(kind, term)
        return name

    def lookup(self, name: str) -> Optional[Binding]:
        return self.binds.get(name)

    def __repr__(self) -> str:
        return f"Env({len(self.ctx)} ctx, {len(self.binds)} binds)"


class WhnfClass(enum.Enum):
    NEUTRAL = "neutral"
    BLOCKED = "blocked"
    VALUE = "value"
    STUCK = "stuck"  # an eliminator applied to the wrong kind of value (ill-typed input)


def spine_head(t):
    t = strip_ann(t)
    while isinstance(t, (Dtor, Match)):
        t = strip_ann(t.scrutinee)
    return t


def whnf_class(t) -> WhnfClass:
    t = strip_ann(t)
    match t:
        case Universe() | TyCtor() | Ctor() | Comatch():
            return WhnfClass.VALUE
        case Var():
            return WhnfClass.NEUTRAL
        case Meta():
            return WhnfClass.BLOCKED
        case Dtor() | Match():
            match spine_head(t):
                case Var():
                    return WhnfClass.NEUTRAL
                case Meta():
                    return WhnfClass.BLOCKED
            return WhnfClass.STUCK
    return WhnfClass.STUCK


def _enter(clause, closure, args, env: Env, extra: Optional[dict] = None):
    """Bind closure then arguments as unevaluated values and open the clause body."""
    m: dict = {}
    for k, v in closure:
        m[k] = Var(env.bind("val", v, k))
    for b, a in zip(clause.binders, args):
        m[b] = Var(env.bind("val", a, b))
    if extra:
        m.update(extra)
    return subst_apply(clause.body, m)


def _select(cases, name: str, what: str):
    clause = cases.find(name)
    if clause is None:
        raise MissingCase(f"no clause for {what} {name}")
    if clause.absurd:
        raise StuckAbsurd(f"reduction entered the absurd clause {name}")
    return clause


def _solved(metas: Optional[MetaMap], t: Meta):
    if metas is None:
        return None
    return metas.solution(t.name)


def _env_delta(t: Meta, sol, env: Env):
    m = {k: Var(env.bind("subst", v, k)) for k, v in t.delayed}
    return subst_apply(sol, m)


def step(e, env: Env, metas: Optional[MetaMap] = None):
    """One reduction step by the first applicable rule, or None for a WHNF."""
    match e:
        case Var(name=x):
            b = env.lookup(x)
            if b is not None:
                return b.term, env
            entry = env.ctx.lookup(x)
            if entry is not None and entry.body is not None:
                return entry.body, env
            return None
        case Ann(body=b, ty=ty):
            r = step(b, env, metas)
            if r is None:
                return b, env
            return Ann(r[0], ty), env
        case Let(name=x, bound=s, body=b):
            y = env.bind("val", s, x)
            return subst_apply(b, {x: Var(y)}), env
        case Match(scrutinee=s, closure=clo, cases=cs):
            h = strip_ann(s)
            if isinstance(h, Ctor):
                clause = _select(cs, h.name, "constructor")
                return _enter(clause, clo, h.args, env), env
            r = step(s, env, metas)
            if r is None:
                return None
            return dataclasses.replace(e, scrutinee=r[0]), env
        case Dtor(scrutinee=s, name=d, args=args):
            h = strip_ann(s)
            if isinstance(h, Comatch):
                x = env.bind("comatch", h, h.label.name)
                return Dtor(Var(x), d, args, e.implicit), env
            if isinstance(h, Var):
                b = env.lookup(h.name)
                if b is not None and b.kind == "comatch":
                    cm = b.term
                    clause = _select(cm.cocases, d, "destructor")
                    return _enter(clause, cm.closure, args, env, {cm.label.name: Var(h.name)}), env
            r = step(s, env, metas)
            if r is None:
                return None
            return Dtor(r[0], d, args, e.implicit), env
        case Meta():
            sol = _solved(metas, e)
            if sol is None:
                return None
            return _env_delta(e, sol, env), env
        case Universe() | TyCtor() | Ctor() | Comatch():
            return None
    raise TypeError(f"not a term: {e!r}")


def whnf(e, env: Env, metas: Optional[MetaMap] = None, fuel: int = DEFAULT_FUEL):
    """Reduce to weak head normal form; returns (term, env).

    Implemented as a spine machine; each rule application costs one unit of fuel.
    """
    spine: list = []
    cur = e
    steps = 0
    while True:
        if steps > fuel:
            raise FuelExhausted(fuel)
        match cur:
            case Ann(body=b):
                cur = b
                continue
            case Match() | Dtor():
                spine.append(cur)
                cur = cur.scrutinee
                continue
            case Let(name=x, bound=s, body=b):
                y = env.bind("val", s, x)
                cur = subst_apply(b, {x: Var(y)})
                steps += 1
                continue
            case Var(name=x):
                b = env.lookup(x)
                if b is not None:
                    if b.kind == "comatch" and spine and isinstance(spine[-1], Dtor):
                        frame = spine.pop()
                        cm = b.term
                        clause = _select(cm.cocases, frame.name, "destructor")
                        cur = _enter(clause, cm.closure, frame.args, env, {cm.label.name: Var(x)})
                    else:
                        cur = b.term
                    steps += 1
                    continue
                entry = env.ctx.lookup(x)
                if entry is not None and entry.body is not None:
                    cur = entry.body
                    steps += 1
                    continue
            case Ctor(name=k, args=args):
                if spine and isinstance(spine[-1], Match):
                    frame = spine.pop()
                    clause = _select(frame.cases, k, "constructor")
                    cur = _enter(clause, frame.closure, args, env)
                    steps += 1
                    continue
            case Comatch(label=lab):
                if spine and isinstance(spine[-1], Dtor):
                    cur = Var(env.bind("comatch", cur, lab.name))
                    steps += 1
                    continue
            case Meta():
                sol = _solved(metas, cur)
                if sol is not None:
                    cur = _env_delta(cur, sol, env)
                    steps += 1
                    continue
        break
    for frame in reversed(spine):
        cur = dataclasses.replace(frame, scrutinee=cur)
    return cur, env


def quote(t, env: Env):
    """Substitute environment-bound (non-context) variables; closures only, never bodies."""
    memo: dict = {}

    def q(t):
        bound = [x for x in free_vars(t) if x in env.binds]
        if not bound:
            return t
        m = {}
        for x in bound:
            if x not in memo:
                memo[x] = q(env.binds[x].term)
            m[x] = memo[x]
        return subst_apply(t, m)

    return q(t)


def normalize(ctx: Context, e, metas: Optional[MetaMap] = None, fuel: int = DEFAULT_FUEL):
    env = Env(ctx)
    w, env = whnf(e, env, metas, fuel)
    return quote(w, env)


def whnf_in(ctx: Context, e, metas: Optional[MetaMap] = None, fuel: int = DEFAULT_FUEL):
    return whnf(e, Env(ctx), metas, fuel)


def deep_nf(e, env: Env, metas: Optional[MetaMap] = None, fuel: int = DEFAULT_FUEL):
    """Normal form: WHNF at every position outside (co)match bodies.

    The result mentions no environment-bound or let-bound context variables
    outside (co)match bodies.
    """
    w, env = whnf(e, env, metas, fuel)
    return _nf_children(w, env, metas, fuel)


def _nf_children(w, env, metas, fuel):
    nf = lambda t: deep_nf(t, env, metas, fuel)  # noqa: E731
    match w:
        case TyCtor(name=n, args=a, implicit=imp):
            return TyCtor(n, tuple(nf(x) for x in a), imp)
        case Ctor(name=n, args=a, implicit=imp):
            return Ctor(n, tuple(nf(x) for x in a), imp)
        case Comatch(label=lab, closure=clo, cocases=cs):
            return Comatch(lab, tuple((k, nf(v)) for k, v in clo), cs)
        case Dtor(scrutinee=s, name=n, args=a, implicit=imp):
            return Dtor(_nf_children(s, env, metas, fuel), n, tuple(nf(x) for x in a), imp)
        case Match(scrutinee=s, closure=clo, motive_binder=z, motive=m):
            s2 = _nf_children(s, env, metas, fuel)
            clo2 = tuple((k, nf(v)) for k, v in clo)
            if m is None:
                return dataclasses.replace(w, scrutinee=s2, closure=clo2)
            if z in env.ctx or z in env.binds:
                z2 = fresh(z)
                m = subst_apply(m, {z: Var(z2)})
                z = z2
            return dataclasses.replace(w, scrutinee=s2, closure=clo2, motive_binder=z, motive=nf(m))
        case Meta(name=n, delayed=d):
            return Meta(n, tuple((k, nf(v)) for k, v in d))
        case _:
            return w


def full_normalize(ctx: Context, e, metas: Optional[MetaMap] = None, fuel: int = DEFAULT_FUEL):
    return deep_nf(e, Env(ctx), metas, fuel)
