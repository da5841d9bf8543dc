"""Core syntax: terms, contexts, declarations, substitution and alpha-equality."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

_fresh_counter = itertools.count(1)


def fresh(base: str) -> str:
    """A name no parser-produced or previously generated name can equal."""
    return f"{base_name(base)}'{next(_fresh_counter)}"


def base_name(name: str) -> str:
    return name.split("'", 1)[0] or "x"


@dataclass(frozen=True)
class Label:
    """Identity of a (co)match. Equality is by ``uid`` only."""

    name: str = field(compare=False)
    uid: int
    origin: str = field(compare=False, default="")
    # "local" for source-level (co)matches, "def"/"codef" for top-level ones
    kind: str = field(compare=False, default="local")
    arity: int = field(compare=False, default=0)

    @property
    def is_global(self) -> bool:
        return self.kind != "local"


_label_counter = itertools.count(1)


def new_label(name: str, origin: str = "", kind: str = "local", arity: int = 0) -> Label:
    return Label(name, next(_label_counter), origin, kind, arity)


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Ann:
    body: "Term"
    ty: "Term"


@dataclass(frozen=True)
class Let:
    name: str
    ty: "Term"
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class Universe:
    pass


@dataclass(frozen=True)
class TyCtor:
    name: str
    args: tuple = ()
    implicit: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class Ctor:
    name: str
    args: tuple = ()
    implicit: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class Dtor:
    scrutinee: "Term"
    name: str
    args: tuple = ()
    implicit: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class Clause:
    """A case ``K(binders) => body`` or cocase; ``body is None`` means absurd."""

    name: str
    binders: tuple
    body: Optional["Term"]

    @property
    def absurd(self) -> bool:
        return self.body is None


class Clauses:
    """Mutable box of clauses.

    Top-level (co)definitions are inlined at every use site and may be
    recursive, so their clause lists are shared by reference and filled in
    after the referencing terms exist. Compared by identity.
    """

    __slots__ = ("items",)

    def __init__(self, items: Iterable[Clause] = ()):
        self.items: list[Clause] = list(items)

    def find(self, name: str) -> Optional[Clause]:
        for c in self.items:
            if c.name == name:
                return c
        return None

    def __repr__(self) -> str:
        return f"Clauses({[c.name for c in self.items]})"


Subst = tuple  # tuple of (name, Term) pairs, ordered


@dataclass(frozen=True)
class Match:
    scrutinee: "Term"
    label: Label
    closure: Subst
    motive_binder: str
    motive: Optional["Term"]
    cases: Clauses = field(compare=False)


@dataclass(frozen=True)
class Comatch:
    label: Label
    closure: Subst
    cocases: Clauses = field(compare=False)


@dataclass(frozen=True)
class Meta:
    name: str
    delayed: Subst = ()


Term = Union[Var, Ann, Let, Universe, TyCtor, Ctor, Match, Dtor, Comatch, Meta]

TYPE = Universe()


# ---------------------------------------------------------------- scoping structures


@dataclass(frozen=True)
class Param:
    name: str
    ty: Term
    implicit: bool = False


Telescope = tuple  # tuple[Param, ...]


@dataclass(frozen=True)
class CtxEntry:
    name: str
    ty: Term
    body: Optional[Term] = None
    marked: bool = False


class Context:
    """Typing context: a snoc-list of entries, looked up by name."""

    __slots__ = ("entries", "_index")

    def __init__(self, entries: Iterable[CtxEntry] = ()):
        self.entries: tuple = tuple(entries)
        self._index = {e.name: i for i, e in enumerate(self.entries)}

    def extend(self, name: str, ty: Term, body: Optional[Term] = None, marked: bool = False) -> "Context":
        return Context(self.entries + (CtxEntry(name, ty, body, marked),))

    def extend_tele(self, tele: Iterable[Param]) -> "Context":
        return Context(self.entries + tuple(CtxEntry(p.name, p.ty) for p in tele))

    def lookup(self, name: str) -> Optional[CtxEntry]:
        i = self._index.get(name)
        return None if i is None else self.entries[i]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def params(self) -> list[CtxEntry]:
        """Entries a fresh metavariable may depend on: no body, not marked."""
        return [e for e in self.entries if e.body is None and not e.marked]

    def identity(self) -> Subst:
        return tuple((e.name, Var(e.name)) for e in self.params())

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __repr__(self) -> str:
        return f"Context({list(self.entries)!r})"


EMPTY_CTX = Context()


# ---------------------------------------------------------------- declarations


@dataclass(frozen=True)
class CtorDecl:
    name: str
    args: Telescope
    result_args: tuple
    span: object = field(default=None, compare=False)


@dataclass(frozen=True)
class DtorDecl:
    self_name: str
    self_args: tuple
    name: str
    args: Telescope
    ret: Term
    span: object = field(default=None, compare=False)


@dataclass(frozen=True)
class DataDecl:
    name: str
    indices: Telescope
    ctors: tuple
    span: object = field(default=None, compare=False)


@dataclass(frozen=True)
class CodataDecl:
    name: str
    indices: Telescope
    dtors: tuple
    span: object = field(default=None, compare=False)


@dataclass(frozen=True)
class DefDecl:
    """Top-level match definition; inlined as a labeled match at each call."""

    name: str
    label: Label
    self_name: str
    self_type: str
    self_args: tuple
    params: Telescope
    ret: Term
    cases: Clauses = field(compare=False)
    span: object = field(default=None, compare=False)


@dataclass(frozen=True)
class CodefDecl:
    """Top-level comatch definition; inlined as a labeled comatch at each call."""

    name: str
    label: Label
    params: Telescope
    type_name: str
    type_args: tuple
    cocases: Clauses = field(compare=False)
    span: object = field(default=None, compare=False)


@dataclass(frozen=True)
class LetDecl:
    name: str
    ty: Term
    body: Term
    span: object = field(default=None, compare=False)


Declaration = Union[DataDecl, CodataDecl, DefDecl, CodefDecl, LetDecl]


class GlobalEnv:
    """Ordered declarations with name lookup tables."""

    def __init__(self, decls: Iterable[Declaration] = ()):
        self.decls: list = []
        self.types: dict = {}
        self.ctors: dict = {}  # ctor name -> (DataDecl, CtorDecl)
        self.dtors: dict = {}  # dtor name -> (CodataDecl, DtorDecl)
        self.defs: dict = {}
        self.codefs: dict = {}
        self.lets: dict = {}
        for d in decls:
            self.add(d)

    def add(self, d: Declaration) -> None:
        self.decls.append(d)
        self._index(d)

    def replace(self, old: Declaration, new: Declaration) -> None:
        i = next(i for i, d in enumerate(self.decls) if d is old)
        self.decls[i] = new
        self._index(new)

    def _index(self, d: Declaration) -> None:
        match d:
            case DataDecl(name=n):
                self.types[n] = d
                for c in d.ctors:
                    self.ctors[c.name] = (d, c)
            case CodataDecl(name=n):
                self.types[n] = d
                for c in d.dtors:
                    self.dtors[c.name] = (d, c)
            case DefDecl(name=n):
                self.defs[n] = d
            case CodefDecl(name=n):
                self.codefs[n] = d
            case LetDecl(name=n):
                self.lets[n] = d

    def data(self, name: str) -> Optional[DataDecl]:
        d = self.types.get(name)
        return d if isinstance(d, DataDecl) else None

    def codata(self, name: str) -> Optional[CodataDecl]:
        d = self.types.get(name)
        return d if isinstance(d, CodataDecl) else None

    def def_by_label(self, label: Label) -> Optional[DefDecl]:
        d = self.defs.get(label.name)
        return d if d is not None and d.label == label else None

    def codef_by_label(self, label: Label) -> Optional[CodefDecl]:
        d = self.codefs.get(label.name)
        return d if d is not None and d.label == label else None


# ---------------------------------------------------------------- free variables


def free_vars(t: Term) -> set:
    out: set = set()
    _fv(t, frozenset(), out)
    return out


def _fv(t: Term, bound: frozenset, out: set) -> None:
    match t:
        case Var(name=n):
            if n not in bound:
                out.add(n)
        case Ann(body=b, ty=ty):
            _fv(b, bound, out)
            _fv(ty, bound, out)
        case Let(name=n, ty=ty, bound=s, body=b):
            _fv(ty, bound, out)
            _fv(s, bound, out)
            _fv(b, bound | {n}, out)
        case Universe():
            pass
        case TyCtor(args=args) | Ctor(args=args):
            for a in args:
                _fv(a, bound, out)
        case Dtor(scrutinee=s, args=args):
            _fv(s, bound, out)
            for a in args:
                _fv(a, bound, out)
        case Match(scrutinee=s, closure=clo, motive_binder=z, motive=m):
            _fv(s, bound, out)
            for _, v in clo:
                _fv(v, bound, out)
            if m is not None:
                _fv(m, bound | {z}, out)
        case Comatch(closure=clo):
            for _, v in clo:
                _fv(v, bound, out)
        case Meta(delayed=d):
            for _, v in d:
                _fv(v, bound, out)
        case _:
            raise TypeError(f"not a term: {t!r}")


def metas_of(t: Term) -> set:
    """Metavariable names occurring in ``t`` outside (co)match bodies."""
    out: set = set()

    def go(t):
        match t:
            case Meta(name=n, delayed=d):
                out.add(n)
                for _, v in d:
                    go(v)
            case _:
                for c in children(t):
                    go(c)

    go(t)
    return out


def children(t: Term) -> list:
    """Immediate subterms in the same scope family (bodies excluded)."""
    match t:
        case Var() | Universe():
            return []
        case Ann(body=b, ty=ty):
            return [b, ty]
        case Let(ty=ty, bound=s, body=b):
            return [ty, s, b]
        case TyCtor(args=args) | Ctor(args=args):
            return list(args)
        case Dtor(scrutinee=s, args=args):
            return [s, *args]
        case Match(scrutinee=s, closure=clo, motive=m):
            return [s, *(v for _, v in clo)] + ([m] if m is not None else [])
        case Comatch(closure=clo):
            return [v for _, v in clo]
        case Meta(delayed=d):
            return [v for _, v in d]
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------- substitution


def subst_apply(t: Term, theta: Union[Mapping, Subst]) -> Term:
    """Capture-avoiding substitution; (co)match bodies are reached only via closures."""
    m = dict(theta) if not isinstance(theta, dict) else theta
    if not m:
        return t
    return _subst(t, m, None)


def _range_fv(m: dict, cache: list) -> set:
    if cache[0] is None:
        acc: set = set()
        for v in m.values():
            acc |= free_vars(v)
        cache[0] = acc
    return cache[0]


def _subst(t: Term, m: dict, cache) -> Term:
    if cache is None:
        cache = [None]
    match t:
        case Var(name=n):
            return m.get(n, t)
        case Universe():
            return t
        case Ann(body=b, ty=ty):
            return Ann(_subst(b, m, cache), _subst(ty, m, cache))
        case Let(name=n, ty=ty, bound=s, body=b):
            n2, b2 = _under_binder(n, b, m, cache)
            return Let(n2, _subst(ty, m, cache), _subst(s, m, cache), b2)
        case TyCtor(name=n, args=args, implicit=imp):
            return TyCtor(n, tuple(_subst(a, m, cache) for a in args), imp)
        case Ctor(name=n, args=args, implicit=imp):
            return Ctor(n, tuple(_subst(a, m, cache) for a in args), imp)
        case Dtor(scrutinee=s, name=n, args=args, implicit=imp):
            return Dtor(_subst(s, m, cache), n, tuple(_subst(a, m, cache) for a in args), imp)
        case Match(scrutinee=s, label=lab, closure=clo, motive_binder=z, motive=mot, cases=cs):
            if mot is None:
                z2, mot2 = z, None
            else:
                z2, mot2 = _under_binder(z, mot, m, cache)
            return Match(
                _subst(s, m, cache),
                lab,
                tuple((k, _subst(v, m, cache)) for k, v in clo),
                z2,
                mot2,
                cs,
            )
        case Comatch(label=lab, closure=clo, cocases=cs):
            return Comatch(lab, tuple((k, _subst(v, m, cache)) for k, v in clo), cs)
        case Meta(name=n, delayed=d):
            return Meta(n, tuple((k, _subst(v, m, cache)) for k, v in d))
    raise TypeError(f"not a term: {t!r}")


def _under_binder(x: str, body: Term, m: dict, cache) -> tuple:
    inner = {k: v for k, v in m.items() if k != x}
    if not inner:
        return x, body
    if x in _range_fv(inner, [None]):
        x2 = fresh(x)
        inner[x] = Var(x2)
        return x2, _subst(body, inner, None)
    return x, _subst(body, inner, None)


def rename(t: Term, mapping: Mapping) -> Term:
    return subst_apply(t, {k: Var(v) for k, v in mapping.items()})


def subst_args(args: Iterable[Term], theta) -> tuple:
    return tuple(subst_apply(a, theta) for a in args)


def subst_tele(tele: Telescope, theta) -> Telescope:
    """Apply ``theta`` to a telescope's types; binders shadow later entries."""
    m = dict(theta)
    out = []
    for p in tele:
        out.append(Param(p.name, subst_apply(p.ty, m), p.implicit))
        m.pop(p.name, None)
    return tuple(out)


def rename_tele(tele: Telescope, names: list) -> Telescope:
    """Rename a telescope's binders to ``names``, rewriting later types."""
    out = []
    m: dict = {}
    for p, n in zip(tele, names):
        out.append(Param(n, subst_apply(p.ty, m), p.implicit))
        m[p.name] = Var(n)
    return tuple(out)


def compose(theta2: Subst, theta1: Subst) -> Subst:
    """``theta2 . theta1``: apply theta1 first."""
    first = tuple((k, subst_apply(v, dict(theta2))) for k, v in theta1)
    dom = {k for k, _ in first}
    return first + tuple((k, v) for k, v in theta2 if k not in dom)


def instantiate_clause(clause: Clause, closure: Subst, avoid: Iterable[str] = (), extra: Optional[Mapping] = None) -> tuple:
    """Bring a clause body into the closure's outer scope.

    Returns (binder names, body). Binders clashing with ``avoid`` or with the
    closure's range are renamed.
    """
    m = dict(closure)
    if extra:
        m.update(extra)
    taken = set(avoid)
    for _, v in closure:
        taken |= free_vars(v)
    if extra:
        for v in extra.values():
            taken |= free_vars(v)
    names = []
    for b in clause.binders:
        if b in taken:
            b2 = fresh(b)
            m[b] = Var(b2)
            names.append(b2)
        else:
            # binders shadow closure parameters of the same name
            m[b] = Var(b)
            names.append(b)
    body = None if clause.body is None else subst_apply(clause.body, m)
    return tuple(names), body


# ---------------------------------------------------------------- alpha equality


def alpha_eq(a: Term, b: Term, label_eq=None) -> bool:
    """Equality up to bound-variable renaming.

    Labels compare by identity unless ``label_eq`` is supplied; free
    variables compare by name; (co)match bodies are represented by their
    label and closure.
    """
    return _aeq(a, b, {}, {}, label_eq or (lambda l1, l2: l1 == l2))


def _aeq(a, b, ra: dict, rb: dict, leq) -> bool:
    match a, b:
        case Var(name=x), Var(name=y):
            if x in ra or y in rb:
                return ra.get(x) is not None and ra.get(x) == rb.get(y)
            return x == y
        case Universe(), Universe():
            return True
        case Ann(body=b1, ty=t1), Ann(body=b2, ty=t2):
            return _aeq(b1, b2, ra, rb, leq) and _aeq(t1, t2, ra, rb, leq)
        case Let(name=x, ty=t1, bound=s1, body=e1), Let(name=y, ty=t2, bound=s2, body=e2):
            if not (_aeq(t1, t2, ra, rb, leq) and _aeq(s1, s2, ra, rb, leq)):
                return False
            k = object()
            return _aeq(e1, e2, {**ra, x: k}, {**rb, y: k}, leq)
        case TyCtor(name=n1, args=a1), TyCtor(name=n2, args=a2):
            return n1 == n2 and _aeq_args(a1, a2, ra, rb, leq)
        case Ctor(name=n1, args=a1), Ctor(name=n2, args=a2):
            return n1 == n2 and _aeq_args(a1, a2, ra, rb, leq)
        case Dtor(scrutinee=s1, name=n1, args=a1), Dtor(scrutinee=s2, name=n2, args=a2):
            return n1 == n2 and _aeq(s1, s2, ra, rb, leq) and _aeq_args(a1, a2, ra, rb, leq)
        case Match() as m1, Match() as m2:
            if not leq(m1.label, m2.label) or len(m1.closure) != len(m2.closure):
                return False
            if not _aeq(m1.scrutinee, m2.scrutinee, ra, rb, leq):
                return False
            if not _aeq_args([v for _, v in m1.closure], [v for _, v in m2.closure], ra, rb, leq):
                return False
            if (m1.motive is None) != (m2.motive is None):
                return False
            if m1.motive is None:
                return True
            k = object()
            return _aeq(m1.motive, m2.motive, {**ra, m1.motive_binder: k}, {**rb, m2.motive_binder: k}, leq)
        case Comatch(label=l1, closure=c1), Comatch(label=l2, closure=c2):
            return leq(l1, l2) and len(c1) == len(c2) and _aeq_args([v for _, v in c1], [v for _, v in c2], ra, rb, leq)
        case Meta(name=n1, delayed=d1), Meta(name=n2, delayed=d2):
            if n1 != n2 or len(d1) != len(d2):
                return False
            return all(k1 == k2 and _aeq(v1, v2, ra, rb, leq) for (k1, v1), (k2, v2) in zip(d1, d2))
    return False


def _aeq_args(xs, ys, ra, rb, leq) -> bool:
    return len(xs) == len(ys) and all(_aeq(x, y, ra, rb, leq) for x, y in zip(xs, ys))


def strip_ann(t: Term) -> Term:
    while isinstance(t, Ann):
        t = t.body
    return t


def is_var_renaming(theta: Subst) -> bool:
    return all(isinstance(v, Var) for _, v in theta)


def nat_literal(n: int, zero: Term, succ) -> Term:
    t = zero
    for _ in range(n):
        t = succ(t)
    return t
