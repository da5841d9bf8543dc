"""Printing core terms and declarations as surface syntax (and a core-form debug view)."""

from __future__ import annotations

from .core import (
    Ann,
    CodataDecl,
    CodefDecl,
    Comatch,
    Ctor,
    DataDecl,
    DefDecl,
    Dtor,
    LetDecl,
    Let,
    Match,
    Meta,
    TyCtor,
    Universe,
    Var,
    instantiate_clause,
)


def display_name(n: str) -> str:
    # top-level lets live under an "@" prefix so that local binders never shadow them
    return n[1:] if n.startswith("@") else n


def _args(xs) -> str:
    return "(" + ", ".join(show(a) for a in xs) + ")"


def _call(name: str, xs) -> str:
    return name + _args(xs) if xs else name


def _postfix_target(t) -> str:
    s = show(t)
    if isinstance(t, (Let, Comatch)) and not (isinstance(t, Comatch) and t.label.is_global):
        return f"({s})"
    return s


def show(t) -> str:
    match t:
        case Var(name=n):
            return display_name(n)
        case Universe():
            return "Type"
        case Ann(body=b, ty=ty):
            return f"({show(b)} : {show(ty)})"
        case Let(name=n, ty=ty, bound=s, body=b):
            return f"let {n} : {show(ty)} := {show(s)}; {show(b)}"
        case TyCtor(name=n, args=a) | Ctor(name=n, args=a):
            return _call(n, a)
        case Dtor(scrutinee=s, name=n, args=a):
            return f"{_postfix_target(s)}.{_call(n, a)}"
        case Match(scrutinee=s, label=lab, closure=clo) if lab.is_global:
            return f"{_postfix_target(s)}.{_call(lab.name, [v for _, v in clo[: lab.arity]])}"
        case Match(scrutinee=s, closure=clo, motive_binder=z, motive=m, cases=cs):
            head = f"{_postfix_target(s)}.match"
            if m is not None:
                head += f" as {z} => {show(m)}"
            return f"{head} {{ {_clauses(cs.items, clo, False)} }}"
        case Comatch(label=lab, closure=clo) if lab.is_global:
            return _call(lab.name, [v for _, v in clo[: lab.arity]])
        case Comatch(label=lab, closure=clo, cocases=cs):
            return f"comatch {lab.name} {{ {_clauses(cs.items, clo, True)} }}"
        case Meta(name=n, delayed=d):
            return f"?{n}" + (_args([v for _, v in d]) if d else "")
    raise TypeError(f"not a term: {t!r}")


def _clauses(items, closure, co: bool) -> str:
    parts = []
    for c in items:
        names, body = instantiate_clause(c, closure)
        parts.append(_clause_text(c.name, names, body, co))
    return ", ".join(parts)


def _clause_text(name: str, names, body, co: bool) -> str:
    head = ("." if co else "") + (name + "(" + ", ".join(names) + ")" if names else name)
    return f"{head} absurd" if body is None else f"{head} => {show(body)}"


def show_tele(tele) -> str:
    if not tele:
        return ""
    parts = []
    for p in tele:
        parts.append(("implicit " if p.implicit else "") + f"{p.name}: {show(p.ty)}")
    return "(" + ", ".join(parts) + ")"


def show_decl(d) -> str:
    match d:
        case DataDecl(name=n, indices=ix, ctors=cs):
            body = ",\n".join(f"  {c.name}{show_tele(c.args)}: {_call(n, c.result_args)}" for c in cs)
            return f"data {n}{show_tele(ix)} {{\n{body}\n}}"
        case CodataDecl(name=n, indices=ix, dtors=ds):
            body = ",\n".join(
                f"  ({c.self_name}: {_call(n, c.self_args)}).{c.name}{show_tele(c.args)}: {show(c.ret)}" for c in ds
            )
            return f"codata {n}{show_tele(ix)} {{\n{body}\n}}"
        case DefDecl(name=n, self_name=sn, self_type=st, self_args=sa, params=ps, ret=r, cases=cs):
            body = ",\n".join("  " + _clause_text(c.name, c.binders, c.body, False) for c in cs.items)
            return f"def ({sn}: {_call(st, sa)}).{n}{show_tele(ps)}: {show(r)} {{\n{body}\n}}"
        case CodefDecl(name=n, params=ps, type_name=tn, type_args=ta, cocases=cs):
            body = ",\n".join("  " + _clause_text(c.name, c.binders, c.body, True) for c in cs.items)
            return f"codef {n}{show_tele(ps)}: {_call(tn, ta)} {{\n{body}\n}}"
        case LetDecl(name=n, ty=ty, body=b):
            return f"let {n}: {show(ty)} {{ {show(b)} }}"
    raise TypeError(f"not a declaration: {d!r}")


def show_program(decls) -> str:
    return "\n\n".join(show_decl(d) for d in decls) + "\n"


def show_core(t) -> str:
    """Core notation with explicit labels and closures, for traces and tests."""
    match t:
        case Var(name=n):
            return n
        case Universe():
            return "Type"
        case Ann(body=b, ty=ty):
            return f"({show_core(b)} : {show_core(ty)})"
        case Let(name=n, ty=ty, bound=s, body=b):
            return f"let {n} : {show_core(ty)} := {show_core(s)}; {show_core(b)}"
        case TyCtor(name=n, args=a) | Ctor(name=n, args=a):
            return n + "(" + ", ".join(show_core(x) for x in a) + ")" if a else n
        case Dtor(scrutinee=s, name=n, args=a):
            tail = "(" + ", ".join(show_core(x) for x in a) + ")" if a else ""
            return f"{show_core(s)}.{n}{tail}"
        case Match(scrutinee=s, label=lab, closure=clo, motive_binder=z, motive=m, cases=cs):
            mot = f" as {z} return {show_core(m)}" if m is not None else ""
            return f"{show_core(s)}.match {lab.name} {_core_clo(clo)}{mot} {{ {_core_clauses(cs, False)} }}"
        case Comatch(label=lab, closure=clo, cocases=cs):
            return f"comatch {lab.name} {_core_clo(clo)} {{ {_core_clauses(cs, True)} }}"
        case Meta(name=n, delayed=d):
            return f"?{n}[" + ", ".join(f"{k} ↦ {show_core(v)}" for k, v in d) + "]"
    raise TypeError(f"not a term: {t!r}")


def _core_clo(clo) -> str:
    return "(" + ", ".join(show_core(v) for _, v in clo) + ")"


def _core_clauses(cs, co: bool) -> str:
    out = []
    for c in cs.items:
        head = c.name + ("(" + ", ".join(c.binders) + ")" if c.binders else "")
        out.append(f"{head} absurd" if c.body is None else f"{head} ↦ {show_core(c.body)}")
    return ", ".join(out)


__all__ = ["show", "show_core", "show_decl", "show_program", "show_tele"]
