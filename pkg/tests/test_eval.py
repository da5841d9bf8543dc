from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import POSITIVE, load_corpus
from oracles import naive_nf, nat

from polarkit.core import TYPE, Clause, Clauses, Comatch, Context, Ctor, Dtor, Let, Match, Meta, TyCtor, Var, alpha_eq, free_vars, new_label
from polarkit.eval import Env, FuelExhausted, StuckAbsurd, WhnfClass, normalize, step, whnf, whnf_class
from polarkit.metas import MetaMap
from polarkit.typecheck import global_name


def data_lets(prog):
    """Top-level lets whose declared type is a data type, as (name, term)."""
    out = []
    for name, d in prog.genv.lets.items():
        ty = normalize(prog.globals, d.ty, prog.metas)
        if isinstance(ty, TyCtor) and prog.genv.data(ty.name) is not None:
            out.append((name, Var(global_name(name))))
    return out


def oracle_lets(prog) -> dict:
    return {global_name(n): d.body for n, d in prog.genv.lets.items()}


def ones_stream():
    lab = new_label("ones")
    return Comatch(lab, (), Clauses([Clause("hd", (), nat(1)), Clause("tl", (), Var("ones"))]))


def looping(label_name="L"):
    lab = new_label(label_name)
    return Dtor(Comatch(lab, (), Clauses([Clause("d", (), Dtor(Var(label_name), "d"))])), "d")


class TestStep:
    def test_match_on_constructor(self, prelude):
        t = prelude.parse_term("T.not")
        out, _ = step(t, Env(prelude.globals))
        assert out == Ctor("F")

    def test_comatch_observation_goes_through_self_binding(self):
        env = Env(Context())
        t1, env = step(Dtor(ones_stream(), "hd"), env)
        assert isinstance(t1, Dtor) and isinstance(t1.scrutinee, Var)
        assert env.lookup(t1.scrutinee.name).kind == "comatch"
        t2, env = step(t1, env)
        assert t2 == nat(1)

    def test_solved_meta_is_inlined_with_its_substitution(self):
        metas = MetaMap()
        ctx = Context().extend("x", TyCtor("Nat"))
        metas.register("a", ctx, TyCtor("Nat"))
        metas.solve("a", Ctor("S", (Var("x"),)))
        env = Env(Context())
        t, env = step(Meta("a", (("x", Ctor("Z")),)), env, metas)
        assert isinstance(t, Ctor) and t.name == "S"
        inner = t.args[0]
        assert env.lookup(inner.name).term == Ctor("Z")

    def test_unsolved_meta_is_blocked(self):
        metas = MetaMap()
        metas.register("a", Context(), TYPE)
        assert step(Meta("a"), Env(Context()), metas) is None
        assert whnf_class(Dtor(Meta("a"), "d")) is WhnfClass.BLOCKED

    def test_absurd_clause_is_never_entered(self, prelude):
        lab = new_label("m")
        t = Match(Ctor("T"), lab, (), "z", None, Clauses([Clause("T", (), None)]))
        with pytest.raises(StuckAbsurd):
            step(t, Env(prelude.globals))


class TestWhnf:
    def test_universe(self):
        assert whnf(TYPE, Env(Context()))[0] == TYPE

    def test_double_negation_of_bound_variable(self, prelude):
        ctx = prelude.globals.extend("b", TyCtor("Bool"), Ctor("T"))
        assert whnf(prelude.parse_term("b.not.not", ["b"]), Env(ctx))[0] == Ctor("T")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=1, max_value=5000))
    def test_self_observation_exhausts_any_fuel(self, fuel):
        with pytest.raises(FuelExhausted):
            whnf(looping(), Env(Context()), fuel=fuel)

    def test_ones_stream_head(self):
        assert whnf(Dtor(Dtor(ones_stream(), "tl"), "hd"), Env(Context()))[0] == nat(1)


class TestNormalize:
    def test_quotation_rewrites_closures_only(self):
        lab = new_label("x")
        body = Clauses([Clause("ap", ("z",), Var("y"))])
        t = Let("y", TyCtor("Nat"), nat(42), Comatch(lab, (("y", Var("y")),), body))
        out = normalize(Context(), t)
        assert alpha_eq(out, Comatch(lab, (("y", nat(42)),), body))
        assert out.cocases.items[0].body == Var("y")

    def test_neutral_variable(self):
        ctx = Context().extend("x", TyCtor("Nat"))
        assert normalize(ctx, Var("x")) == Var("x")

    def test_constructor_arguments_untouched(self, prelude):
        t = Ctor("Cons", (prelude.parse_term("T.not"),))
        assert normalize(prelude.globals, t) == t


# ---------------------------------------------------------------- corpus-wide properties

CORPUS_DATA_LETS = [(p.name, n, t) for p in POSITIVE for n, t in data_lets(load_corpus(p.name))]


@pytest.mark.parametrize("file,name,term", CORPUS_DATA_LETS, ids=[f"{f}:{n}" for f, n, _ in CORPUS_DATA_LETS])
def test_machine_agrees_with_naive_reducer(file, name, term):
    prog = load_corpus(file)
    machine = prog.evaluate(name)
    oracle = naive_nf(term, oracle_lets(prog))
    assert alpha_eq(machine, oracle), (machine, oracle)


@pytest.mark.parametrize("file,name,term", CORPUS_DATA_LETS, ids=[f"{f}:{n}" for f, n, _ in CORPUS_DATA_LETS])
def test_closed_data_lets_reach_constructors(file, name, term):
    prog = load_corpus(file)
    w, env = whnf(term, Env(prog.globals), prog.metas)
    assert isinstance(w, Ctor)
    assert step(w, env, prog.metas) is None  # whnf is a fixpoint
    assert free_vars(normalize(prog.globals, term, prog.metas)) <= set(prog.globals.names())


def test_whnf_is_deterministic(prelude):
    t = prelude.parse_term("4.even.and(2.add(2).even)")
    a = normalize(prelude.globals, t)
    b = normalize(prelude.globals, t)
    assert alpha_eq(a, b) and a == Ctor("T")


def test_value_is_stable_under_more_solutions(prelude):
    metas = MetaMap()
    metas.register("a", Context(), TyCtor("Bool"))
    metas.register("b", Context(), TyCtor("Bool"))
    metas.solve("a", Ctor("T"))
    t = Ctor("Pair", (Meta("b"),))
    before = normalize(prelude.globals, prelude.parse_term("T.not.and(F)"), metas)
    metas.solve("b", Ctor("F"))
    after = normalize(prelude.globals, prelude.parse_term("T.not.and(F)"), metas)
    assert alpha_eq(before, after)
    assert normalize(prelude.globals, Meta("a"), metas) == Ctor("T")
    assert normalize(prelude.globals, t, metas) == t
