from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nat
from strategies import NAMES, substs, terms

from polarkit.core import (
    TYPE,
    Clause,
    Clauses,
    Comatch,
    Context,
    Ctor,
    Dtor,
    Let,
    Match,
    Meta,
    Var,
    alpha_eq,
    compose,
    free_vars,
    fresh,
    new_label,
    subst_apply,
)


def ap_comatch(label, closure):
    return Comatch(label, closure, Clauses([Clause("ap", ("z",), Var("y"))]))


class TestSubst:
    def test_closure_rewritten_body_untouched(self):
        lab = new_label("L")
        before = ap_comatch(lab, (("y", Var("y")),))
        after = subst_apply(before, {"y": nat(42)})
        assert after == ap_comatch(lab, (("y", nat(42)),))
        assert after.cocases.items[0].body == Var("y")

    def test_empty_substitution_is_identity(self):
        assert subst_apply(Var("x"), {}) == Var("x")

    def test_meta_delayed_substitution_is_composed(self):
        t = Meta("a", (("x", Var("x")),))
        assert subst_apply(t, {"x": Ctor("S", (Ctor("Z"),))}) == Meta("a", (("x", Ctor("S", (Ctor("Z"),))),))

    def test_let_binder_avoids_capture(self):
        t = Let("y", TYPE, Ctor("Z"), Ctor("Pair", (Var("x"), Var("y"))))
        out = subst_apply(t, {"x": Var("y")})
        assert isinstance(out, Let) and out.name != "y"
        assert out.body.args == (Var("y"), Var(out.name))

    def test_motive_binder_shadows(self):
        lab = new_label("m")
        m = Match(Var("x"), lab, (), "z", Ctor("Eq", (Var("z"), Var("x"))), Clauses())
        out = subst_apply(m, {"z": Ctor("Z"), "x": Ctor("T")})
        assert out.scrutinee == Ctor("T")
        assert out.motive == Ctor("Eq", (Var(out.motive_binder), Ctor("T")))


class TestAlphaEq:
    def test_distinct_labels_differ(self):
        a = ap_comatch(new_label("L"), ())
        b = ap_comatch(new_label("L"), ())
        assert not alpha_eq(a, b)
        assert alpha_eq(a, a)

    def test_let_binders_rename(self):
        assert alpha_eq(Let("x", TYPE, Ctor("Z"), Var("x")), Let("y", TYPE, Ctor("Z"), Var("y")))

    def test_free_variables_are_nominal(self):
        assert not alpha_eq(Ctor("K", (Var("x"),)), Ctor("K", (Var("y"),)))

    def test_match_motive_binder_renames(self):
        lab = new_label("m")
        cs = Clauses()
        a = Match(Var("b"), lab, (), "z", Ctor("P", (Var("z"),)), cs)
        b = Match(Var("b"), lab, (), "w", Ctor("P", (Var("w"),)), cs)
        assert alpha_eq(a, b)


class TestFreeVars:
    def test_comatch_contributes_its_closure(self):
        t = Comatch(new_label("L"), (("a", Var("a")),), Clauses([Clause("ap", ("z",), Var("a"))]))
        assert free_vars(t) == {"a"}

    def test_universe_is_closed(self):
        assert free_vars(TYPE) == set()

    def test_meta_substitution_counts(self):
        t = Dtor(Var("x"), "D", (Ctor("K", (Var("y"),)), Meta("a", (("x", Var("z")),))))
        assert free_vars(t) == {"x", "y", "z"}


class TestContext:
    def test_identity_skips_bodied_and_marked(self):
        ctx = Context().extend("a", TYPE).extend("b", TYPE, Ctor("Z")).extend("c", TYPE, marked=True).extend("d", Var("a"))
        assert ctx.identity() == (("a", Var("a")), ("d", Var("d")))

    def test_fresh_never_collides_with_source_names(self):
        assert "'" in fresh("x") and fresh("x") != fresh("x")


# ---------------------------------------------------------------- invariants


@settings(max_examples=300, deadline=None)
@given(terms(metas=True))
def test_identity_substitution(t):
    ident = {x: Var(x) for x in free_vars(t)}
    assert alpha_eq(subst_apply(t, ident), t)


@settings(max_examples=300, deadline=None)
@given(terms(), substs(), substs())
def test_substitution_composes(t, th1, th2):
    lhs = subst_apply(subst_apply(t, th1), th2)
    rhs = subst_apply(t, dict(compose(tuple(th2.items()), tuple(th1.items()))))
    assert alpha_eq(lhs, rhs)


@settings(max_examples=300, deadline=None)
@given(terms(), substs())
def test_free_vars_of_substitution(t, th):
    fv = free_vars(t)
    bound = set()
    for x in fv & set(th):
        bound |= free_vars(th[x])
    assert free_vars(subst_apply(t, th)) <= (fv - set(th)) | bound


def alpha_variant(t, salt: str):
    """Rename every let and motive binder, leaving free variables alone."""
    match t:
        case Let(name=x, ty=ty, bound=s, body=b):
            y = x + salt
            return Let(y, alpha_variant(ty, salt), alpha_variant(s, salt), subst_apply(alpha_variant(b, salt), {x: Var(y)}))
        case Ctor(name=n, args=a):
            return Ctor(n, tuple(alpha_variant(x, salt) for x in a))
        case Dtor(scrutinee=s, name=n, args=a):
            return Dtor(alpha_variant(s, salt), n, tuple(alpha_variant(x, salt) for x in a))
        case Comatch(label=lab, closure=clo, cocases=cs):
            return Comatch(lab, tuple((k, alpha_variant(v, salt)) for k, v in clo), cs)
        case Match(scrutinee=s, label=lab, closure=clo, motive_binder=z, motive=m, cases=cs):
            clo2 = tuple((k, alpha_variant(v, salt)) for k, v in clo)
            if m is None:
                return Match(alpha_variant(s, salt), lab, clo2, z, None, cs)
            z2 = z + salt
            return Match(alpha_variant(s, salt), lab, clo2, z2, subst_apply(alpha_variant(m, salt), {z: Var(z2)}), cs)
        case Meta(name=n, delayed=d):
            return Meta(n, tuple((k, alpha_variant(v, salt)) for k, v in d))
    return t


@settings(max_examples=300, deadline=None)
@given(terms(), terms())
def test_alpha_eq_is_an_equivalence(t, u):
    v1, v2 = alpha_variant(t, "1"), alpha_variant(t, "2")
    assert alpha_eq(t, t)
    assert alpha_eq(t, v1) and alpha_eq(v1, t)
    assert alpha_eq(v1, v2) and alpha_eq(t, v2)
    assert alpha_eq(t, u) == alpha_eq(u, t)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(NAMES), terms(metas=False))
def test_substituting_absent_variable_is_noop(x, t):
    if x not in free_vars(t):
        assert alpha_eq(subst_apply(t, {x: Ctor("Z")}), t)
