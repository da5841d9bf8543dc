"""Surface syntax tree produced by the parser; every node carries a span."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..diagnostics import Span


@dataclass
class SArg:
    value: "SExpr"
    name: Optional[str] = None  # set for `name := value`


@dataclass
class SVar:
    """An identifier, with an argument list when written `f(...)`."""

    name: str
    args: Optional[list]
    span: Span = field(compare=False)


@dataclass
class SType:
    span: Span = field(compare=False)


@dataclass
class SHole:
    span: Span = field(compare=False)


@dataclass
class SNum:
    value: int
    span: Span = field(compare=False)


@dataclass
class SDot:
    target: "SExpr"
    name: str
    args: Optional[list]
    span: Span = field(compare=False)


@dataclass
class SCase:
    name: str
    binders: Optional[list]  # None when written without parentheses; "_" entries are anonymous
    body: Optional["SExpr"]  # None for `absurd`
    span: Span = field(compare=False)


@dataclass
class SMatch:
    target: "SExpr"
    motive_binder: Optional[str]
    motive: Optional["SExpr"]
    cases: list
    span: Span = field(compare=False)


@dataclass
class SComatch:
    name: Optional[str]
    cocases: list
    span: Span = field(compare=False)


@dataclass
class SLambda:
    dtor: str
    binders: Optional[list]
    body: "SExpr"
    span: Span = field(compare=False)


@dataclass
class SArrow:
    dom: "SExpr"
    cod: "SExpr"
    span: Span = field(compare=False)


@dataclass
class SAnn:
    body: "SExpr"
    ty: "SExpr"
    span: Span = field(compare=False)


@dataclass
class SLet:
    name: str
    ty: "SExpr"
    bound: "SExpr"
    body: "SExpr"
    span: Span = field(compare=False)


SExpr = object


@dataclass
class SParam:
    name: str  # "_" for anonymous
    ty: SExpr
    implicit: bool = False


@dataclass
class SCtor:
    name: str
    params: list
    result: Optional[tuple]  # (type name, args or None)
    span: Span = field(compare=False)


@dataclass
class SData:
    name: str
    params: list
    ctors: list
    span: Span = field(compare=False)


@dataclass
class SDtor:
    self_name: Optional[str]
    self_type: Optional[str]
    self_args: Optional[list]
    name: str
    params: list
    ret: SExpr
    span: Span = field(compare=False)


@dataclass
class SCodata:
    name: str
    params: list
    dtors: list
    span: Span = field(compare=False)


@dataclass
class SDef:
    self_name: Optional[str]
    self_type: str
    self_args: Optional[list]
    name: str
    params: list
    ret: SExpr
    cases: list
    span: Span = field(compare=False)


@dataclass
class SCodef:
    name: str
    params: list
    type_name: str
    type_args: Optional[list]
    cocases: list
    span: Span = field(compare=False)


@dataclass
class SLetDecl:
    name: str
    ty: SExpr
    body: SExpr
    span: Span = field(compare=False)


@dataclass
class SurfaceProgram:
    decls: list = field(default_factory=list)
    file: str = "<input>"
