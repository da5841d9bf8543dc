"""Hypothesis strategies for small core terms."""

from __future__ import annotations

from hypothesis import strategies as st

from polarkit.core import TYPE, Clause, Clauses, Comatch, Ctor, Dtor, Let, Match, Meta, TyCtor, Var, new_label

NAMES = ("x", "y", "z", "w")

_LABEL = new_label("gen")
_MATCH_LABEL = new_label("genmatch")


def _comatch(closure_vals):
    closure = tuple((f"c{i}", v) for i, v in enumerate(closure_vals))
    body = Var(closure[0][0]) if closure else Ctor("Z")
    return Comatch(_LABEL, closure, Clauses([Clause("d", ("q",), body)]))


def _match(scrut, closure_vals, motive):
    closure = tuple((f"c{i}", v) for i, v in enumerate(closure_vals))
    cases = Clauses([Clause("T", (), Ctor("Z")), Clause("F", (), Ctor("Z"))])
    return Match(scrut, _MATCH_LABEL, closure, "m", motive, cases)


def terms(names=NAMES, metas: bool = True, max_leaves: int = 12):
    leaves = st.sampled_from([Var(n) for n in names]) | st.just(TYPE) | st.just(Ctor("Z"))
    subst_entry = st.tuples(st.sampled_from(names), st.sampled_from([Var(n) for n in names]))

    def extend(inner):
        options = [
            st.builds(lambda a: Ctor("S", (a,)), inner),
            st.builds(lambda a, b: Ctor("Cons", (a, b)), inner, inner),
            st.builds(lambda a: TyCtor("Vec", (a, TYPE)), inner),
            st.builds(lambda s, a: Dtor(s, "d", (a,)), inner, inner),
            st.builds(_comatch, st.lists(inner, max_size=2)),
            st.builds(_match, inner, st.lists(inner, max_size=2), st.none() | inner),
            st.builds(lambda x, s, b: Let(x, TYPE, s, b), st.sampled_from(names), inner, inner),
        ]
        if metas:
            options.append(
                st.builds(
                    lambda n, d: Meta(n, tuple(dict(d).items())),
                    st.sampled_from(["a", "b"]),
                    st.lists(st.tuples(st.sampled_from(names), inner), max_size=2),
                )
            )
        return st.one_of(options)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def substs(names=NAMES, values=None):
    values = values if values is not None else terms(names, metas=False, max_leaves=4)
    return st.dictionaries(st.sampled_from(names), values, max_size=3)


def normal_forms(names=NAMES, max_leaves: int = 14):
    """Meta-bearing terms without lets or annotations (normal forms in the occurrence grammar)."""
    leaves = st.sampled_from([Var(n) for n in names]) | st.just(TYPE) | st.just(Ctor("Z"))
    meta_names = st.sampled_from(["a", "b", "g"])

    def extend(inner):
        neutral_head = st.sampled_from([Var(n) for n in names]) | st.builds(
            lambda n, d: Meta(n, tuple(dict(d).items())), meta_names, st.lists(st.tuples(st.sampled_from(names), inner), max_size=2)
        )
        return st.one_of(
            st.builds(lambda a: Ctor("S", (a,)), inner),
            st.builds(lambda a, b: Ctor("Cons", (a, b)), inner, inner),
            st.builds(lambda a: TyCtor("Vec", (a, TYPE)), inner),
            st.builds(lambda s, a: Dtor(s, "d", (a,)), neutral_head, inner),
            st.builds(lambda s, a, b: Dtor(Dtor(s, "e", (a,)), "d", (b,)), neutral_head, inner, inner),
            st.builds(_comatch, st.lists(inner, max_size=2)),
            st.builds(_match, neutral_head, st.lists(inner, max_size=2), st.none() | inner),
            st.builds(
                lambda n, d: Meta(n, tuple(dict(d).items())), meta_names, st.lists(st.tuples(st.sampled_from(names), inner), max_size=2)
            ),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)
