"""Turning descriptions into normal-form graphs.

A description is interpreted against one node of a :class:`Builder`;
variables are looked up in an environment shared by every description of
the same clause (rule, lexical entry, empty category). After all
descriptions of a clause are applied, appropriateness closure (``fill``)
makes the graph totally well typed and ``prune`` turns sub-terms that
carry no information beyond their type back into partial leaves.
"""

from __future__ import annotations

from ..errors import InconsistentDescription, UndeclaredType, UnknownFeature
from ..graph import Builder, Mrs
from ..normal import fill, prune
from ..types import TypeHierarchy
from .frontend import Conj, Feat, MacroCall, TypeLit, Var, expand_macros


class Clause:
    """One variable scope: several roots described over one builder."""

    def __init__(self, h: TypeHierarchy, macros=None, where: str = ""):
        self.h = h
        self.b = Builder(h)
        self.env: dict[str, int] = {}
        self.macros = macros or {}
        self.where = where

    def new(self) -> int:
        return self.b.new()

    def describe(self, d, node: int | None = None) -> int:
        if node is None:
            node = self.b.new()
        self._apply(expand_macros(d, self.macros), node)
        return node

    def _apply(self, d, node: int):
        b, h = self.b, self.h
        if isinstance(d, TypeLit):
            if d.name not in h:
                raise UndeclaredType(f"type {d.name} is not declared{self._at(d.line)}", type=d.name)
            if not b.set_type(node, d.name):
                _, t1, t2 = b.clash
                raise InconsistentDescription(f"{t1} and {t2} have no unifier{self._at(d.line)}", t1=t1, t2=t2)
        elif isinstance(d, Var):
            if d.name == "_":
                return
            other = self.env.get(d.name)
            if other is None:
                self.env[d.name] = node
            elif not b.union(other, node):
                _, t1, t2 = b.clash
                raise InconsistentDescription(
                    f"variable {d.name}: {t1} and {t2} have no unifier{self._at(d.line)}", t1=t1, t2=t2)
        elif isinstance(d, Feat):
            if d.feature not in h.introducer:
                raise UnknownFeature(f"feature {d.feature} is not declared{self._at(d.line)}", feature=d.feature)
            self._apply(d.value, b.child(node, d.feature))
        elif isinstance(d, Conj):
            for x in d.items:
                self._apply(x, node)
        elif isinstance(d, MacroCall):  # pragma: no cover - expanded above
            self._apply(expand_macros(d, self.macros), node)
        else:
            raise TypeError(f"not a description: {d!r}")

    def _at(self, line):
        parts = [p for p in (self.where, f"line {line}" if line else "") if p]
        return f" ({', '.join(parts)})" if parts else ""

    def finish(self, roots) -> Mrs:
        """Close under appropriateness and return the pruned normal graph."""
        try:
            fill(self.b)
        except InconsistentDescription as e:
            raise InconsistentDescription(f"{e.args[0]}{self._at(0)}", **e.info) from None
        return prune(self.b.freeze(roots), self.h)


def describe(d, h: TypeHierarchy, macros=None) -> Mrs:
    """Normal graph of a single description."""
    c = Clause(h, macros)
    r = c.describe(d)
    return c.finish([r])
