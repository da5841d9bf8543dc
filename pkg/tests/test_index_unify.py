from __future__ import annotations

import random
import time

import pytest

from oracles import BOOL, NAT, brute_force_unifiable, nat

from polarkit.core import TYPE, Clause, Clauses, Comatch, Context, Ctor, Meta, TyCtor, Var, alpha_eq, new_label, subst_apply
from polarkit.index_unify import Conflict, Fail, Unifier, unify_idx, unify_idx_args
from polarkit.eval import normalize
from polarkit.metas import MetaMap

VAR_SORTS = {"n1": "Nat", "n2": "Nat", "n3": "Nat", "b1": "Bool", "b2": "Bool"}


def var_ctx(base: Context) -> Context:
    for x, s in VAR_SORTS.items():
        base = base.extend(x, NAT if s == "Nat" else BOOL)
    return base


def S(t):
    return Ctor("S", (t,))


class TestExamples:
    def setup_method(self):
        self.ctx = Context().extend("m", NAT).extend("y", NAT).extend("x", BOOL)

    def test_distinct_constructors_conflict(self):
        r = unify_idx(S(Var("m")), Ctor("Z"), self.ctx)
        assert isinstance(r, Conflict) and r.rule == "CONFLICT1"

    def test_identical_terms_delete(self):
        assert unify_idx(nat(3), nat(3), self.ctx) == Unifier(())

    def test_variable_solution(self):
        assert unify_idx(S(Var("y")), S(Ctor("Z")), self.ctx) == Unifier((("y", Ctor("Z")),))

    def test_empty_argument_lists(self):
        assert unify_idx_args((), (), self.ctx) == Unifier(())

    def test_unifier_threads_through_pairs(self):
        r = unify_idx_args((S(Ctor("Z")), Var("x")), (S(Var("y")), Ctor("T")), self.ctx)
        assert isinstance(r, Unifier)
        assert r.as_dict() == {"y": Ctor("Z"), "x": Ctor("T")}
        swapped = unify_idx_args((Var("x"), S(Ctor("Z"))), (Ctor("T"), S(Var("y"))), self.ctx)
        assert swapped.as_dict() == r.as_dict()

    def test_head_clash_in_arguments(self):
        assert isinstance(unify_idx_args((Ctor("Z"),), (S(Var("y")),), self.ctx), Conflict)

    def test_cycle(self):
        r = unify_idx(Var("y"), S(Var("y")), self.ctx)
        assert isinstance(r, Conflict) and r.rule.startswith("CYCLE")

    def test_type_constructor_clash(self):
        assert isinstance(unify_idx(TyCtor("Nat"), TyCtor("Bool"), self.ctx), Conflict)
        assert isinstance(unify_idx(TyCtor("Nat"), Ctor("Z"), self.ctx), Conflict)

    def test_type_constructor_injective(self):
        r = unify_idx(TyCtor("Vec", (Var("y"), TYPE)), TyCtor("Vec", (nat(1), TYPE)), self.ctx)
        assert r == Unifier((("y", nat(1)),))

    def test_comatch_labels(self):
        l1, l2 = new_label("L"), new_label("L")
        body = Clauses([Clause("d", (), Var("c"))])
        a = Comatch(l1, (("c", Var("y")),), body)
        b = Comatch(l1, (("c", nat(2)),), body)
        assert unify_idx(a, b, self.ctx) == Unifier((("y", nat(2)),))
        assert isinstance(unify_idx(a, Comatch(l2, (("c", Var("y")),), body), self.ctx), Conflict)

    def test_unsolved_meta_fails(self):
        metas = MetaMap()
        metas.register("a", Context(), NAT)
        assert isinstance(unify_idx(Meta("a"), Ctor("Z"), self.ctx, metas), Fail)

    def test_distinct_neutrals_fail(self, prelude):
        ctx = prelude.globals.extend("p", BOOL).extend("q", BOOL)
        r = unify_idx(prelude.parse_term("p.not", ["p"]), prelude.parse_term("q.not", ["q"]), ctx)
        assert isinstance(r, Fail)

    def test_bodied_variables_reduce_first(self):
        ctx = self.ctx.extend("k", NAT, nat(1))
        assert unify_idx(Var("k"), S(Var("y")), ctx) == Unifier((("y", Ctor("Z")),))

    def test_trace_records_rules(self):
        trace: list = []
        unify_idx_args((S(Var("y")),), (S(Ctor("Z")),), self.ctx, trace=trace)
        assert [line.split(":")[0] for line in trace] == ["INJ-CTOR", "SOLUTION1"]


# ---------------------------------------------------------------- generated problems


def gen_term(rng: random.Random, sort: str, depth: int):
    vars_ = [x for x, s in VAR_SORTS.items() if s == sort]
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice(vars_)) if rng.random() < 0.6 else (Ctor("Z") if sort == "Nat" else Ctor(rng.choice("TF")))
    if sort == "Bool":
        return Ctor(rng.choice("TF")) if rng.random() < 0.5 else Var(rng.choice(vars_))
    return S(gen_term(rng, sort, depth - 1))


def gen_problem(rng: random.Random):
    pairs = []
    for _ in range(rng.randint(1, 3)):
        sort = rng.choice(["Nat", "Nat", "Bool"])
        pairs.append((gen_term(rng, sort, 4), gen_term(rng, sort, 4)))
    return pairs


def variant(ts1, ts2) -> bool:
    """Are the two term tuples equal up to a bijective renaming of variables?"""
    fwd, bwd = {}, {}

    def go(a, b):
        match a, b:
            case Var(name=x), Var(name=y):
                if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                    return False
                return True
            case Ctor(name=k1, args=a1), Ctor(name=k2, args=a2):
                return k1 == k2 and len(a1) == len(a2) and all(go(p, q) for p, q in zip(a1, a2))
        return False

    return all(go(a, b) for a, b in zip(ts1, ts2))


PROBLEMS = 1000


def test_generated_problems_are_sound():
    rng = random.Random(20240131)
    ctx = var_ctx(Context())
    start = time.perf_counter()
    tally = {"unifier": 0, "conflict": 0}
    for _ in range(PROBLEMS):
        pairs = gen_problem(rng)
        lhs, rhs = [a for a, _ in pairs], [b for _, b in pairs]
        r = unify_idx_args(lhs, rhs, ctx)
        assert not isinstance(r, Fail), pairs
        if isinstance(r, Conflict):
            tally["conflict"] += 1
            assert not brute_force_unifiable(pairs, VAR_SORTS, depth=3), pairs
            continue
        tally["unifier"] += 1
        th = r.as_dict()
        for a, b in pairs:
            assert alpha_eq(normalize(ctx, subst_apply(a, th)), normalize(ctx, subst_apply(b, th)))
        once = [subst_apply(t, th) for t in lhs + rhs]
        assert [subst_apply(t, th) for t in once] == once  # idempotent
        rev = unify_idx_args(lhs[::-1], rhs[::-1], ctx)
        assert isinstance(rev, Unifier)
        all_vars = [Var(x) for x in VAR_SORTS]
        assert variant([subst_apply(v, th) for v in all_vars], [subst_apply(v, rev.as_dict()) for v in all_vars])
    assert time.perf_counter() - start < 30
    assert tally["unifier"] > 100 and tally["conflict"] > 100, tally
