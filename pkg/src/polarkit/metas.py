"""Metavariable map: name -> (context, type, optional solution)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .core import Context, Term


@dataclass
class MetaInfo:
    name: str
    ctx: Context  # parameter entries only; solutions are scoped over their names
    ty: Term
    solution: Optional[Term] = None
    origin: object = None
    # the declaration that created it, for the per-declaration freeze
    owner: Optional[str] = None

    @property
    def param_names(self) -> list:
        return [e.name for e in self.ctx.entries]


class MetaError(Exception):
    pass


class MetaMap:
    def __init__(self):
        self.metas: dict[str, MetaInfo] = {}
        self._counter = itertools.count(1)
        self.owner: Optional[str] = None

    def new_name(self, hint: str = "m") -> str:
        while True:
            n = f"{hint}{next(self._counter)}"
            if n not in self.metas:
                return n

    def register(self, name: str, ctx: Context, ty: Term, origin=None) -> MetaInfo:
        if name in self.metas:
            raise MetaError(f"metavariable {name} registered twice")
        info = MetaInfo(name, ctx, ty, origin=origin, owner=self.owner)
        self.metas[name] = info
        return info

    def fresh(self, ctx: Context, ty: Term, hint: str = "m", origin=None) -> MetaInfo:
        return self.register(self.new_name(hint), ctx, ty, origin)

    def __contains__(self, name: str) -> bool:
        return name in self.metas

    def __getitem__(self, name: str) -> MetaInfo:
        return self.metas[name]

    def get(self, name: str) -> Optional[MetaInfo]:
        return self.metas.get(name)

    def solution(self, name: str) -> Optional[Term]:
        info = self.metas.get(name)
        return None if info is None else info.solution

    def is_unsolved(self, name: str) -> bool:
        info = self.metas.get(name)
        return info is not None and info.solution is None

    def solve(self, name: str, term: Term) -> None:
        info = self.metas[name]
        if info.solution is not None:
            raise MetaError(f"metavariable {name} already solved")
        info.solution = term

    def unsolved(self, owner: Optional[str] = None) -> list:
        return [m for m in self.metas.values() if m.solution is None and (owner is None or m.owner == owner)]

    def __iter__(self):
        return iter(self.metas.values())

    def __len__(self) -> int:
        return len(self.metas)
