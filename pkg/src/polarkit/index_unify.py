"""First-order index unification for dependent (co)pattern matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import Comatch, Context, Ctor, Meta, TyCtor, Var, alpha_eq, compose, free_vars, strip_ann, subst_apply
from .eval import DEFAULT_FUEL, normalize, spine_head
from .metas import MetaMap
from .pretty import show


@dataclass(frozen=True)
class Unifier:
    subst: tuple  # ((name, term), ...)

    def as_dict(self) -> dict:
        return dict(self.subst)


@dataclass(frozen=True)
class Conflict:
    rule: str
    lhs: object = None
    rhs: object = None


@dataclass(frozen=True)
class Fail:
    reason: str


IdxResult = Union[Unifier, Conflict, Fail]


def _solvable(t, ctx: Context) -> Optional[str]:
    if isinstance(t, Var):
        entry = ctx.lookup(t.name)
        if entry is not None and entry.body is None:
            return t.name
    return None


def unify_idx(t1, t2, ctx: Context, metas: Optional[MetaMap] = None, fuel: int = DEFAULT_FUEL, trace: Optional[list] = None) -> IdxResult:
    w1 = strip_ann(normalize(ctx, t1, metas, fuel))
    w2 = strip_ann(normalize(ctx, t2, metas, fuel))

    def log(rule: str):
        if trace is not None:
            trace.append(f"{rule}: {show(w1)} ≡ {show(w2)}")

    if alpha_eq(w1, w2):
        log("DELETION")
        return Unifier(())
    for x, other, side in ((_solvable(w1, ctx), w2, "1"), (_solvable(w2, ctx), w1, "2")):
        if x is None:
            continue
        if x in free_vars(other):
            log(f"CYCLE{side}")
            return Conflict(f"CYCLE{side}", w1, w2)
        log(f"SOLUTION{side}")
        return Unifier(((x, other),))
    if isinstance(spine_head(w1), Meta) or isinstance(spine_head(w2), Meta):
        log("FAIL(meta)")
        return Fail(f"blocked by an unsolved metavariable in {show(w1)} ≡ {show(w2)}")
    match w1, w2:
        case Ctor(name=k1, args=a1), Ctor(name=k2, args=a2):
            if k1 != k2:
                log("CONFLICT1")
                return Conflict("CONFLICT1", w1, w2)
            log("INJ-CTOR")
            return unify_idx_args(a1, a2, ctx, metas, fuel, trace)
        case TyCtor(name=n1, args=a1), TyCtor(name=n2, args=a2):
            if n1 != n2:
                log("CONFLICT2")
                return Conflict("CONFLICT2", w1, w2)
            log("INJ-TYCTOR")
            return unify_idx_args(a1, a2, ctx, metas, fuel, trace)
        case (TyCtor(), Ctor()) | (Ctor(), TyCtor()):
            log("CONFLICT3")
            return Conflict("CONFLICT3", w1, w2)
        case Comatch(label=l1, closure=c1), Comatch(label=l2, closure=c2):
            if l1 != l2:
                log("CONFLICT4")
                return Conflict("CONFLICT4", w1, w2)
            log("INJ-COMATCH")
            return unify_idx_args([v for _, v in c1], [v for _, v in c2], ctx, metas, fuel, trace)
    log("FAIL")
    return Fail(f"no index unification rule applies to {show(w1)} ≡ {show(w2)}")


def unify_idx_args(s1, s2, ctx: Context, metas: Optional[MetaMap] = None, fuel: int = DEFAULT_FUEL, trace: Optional[list] = None) -> IdxResult:
    if len(s1) != len(s2):
        return Fail("argument lists differ in length")
    theta: tuple = ()
    for a, b in zip(s1, s2):
        m = dict(theta)
        r = unify_idx(subst_apply(a, m), subst_apply(b, m), ctx, metas, fuel, trace)
        if not isinstance(r, Unifier):
            return r
        theta = compose(r.subst, theta)
    return Unifier(theta)
