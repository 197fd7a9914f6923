"""Concrete multi-rooted feature graphs and a union-find graph builder.

``Mrs`` is an immutable graph: node ``i`` has type ``types[i]`` and arcs
``arcs[i]`` (a tuple of ``(feature, target)`` pairs sorted by feature
name); ``roots`` lists the distinguished nodes in order. Node ids carry no
meaning; :func:`canonical` renumbers nodes deterministically so that two
graphs are alphabetic variants exactly when their canonical forms are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .types import BOTTOM, TypeHierarchy


@dataclass(frozen=True, eq=False)
class Mrs:
    types: tuple
    arcs: tuple
    roots: tuple

    def _key(self):
        return (self.types, self.arcs, self.roots)

    def __eq__(self, other):
        return isinstance(other, Mrs) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def size(self) -> int:
        return len(self.types)

    def arc(self, q: int, f: str):
        for g, t in self.arcs[q]:
            if g == f:
                return t
        return None

    def walk(self, q: int, path) :
        for f in path:
            q = self.arc(q, f)
            if q is None:
                return None
        return q

    def reachable(self, starts=None) -> list[int]:
        """Nodes reachable from ``starts`` (default: all roots) in DFS preorder."""
        starts = self.roots if starts is None else starts
        seen: dict[int, None] = {}
        stack = list(reversed(starts))
        while stack:
            q = stack.pop()
            if q in seen:
                continue
            seen[q] = None
            stack.extend(t for _, t in reversed(self.arcs[q]))
        return list(seen)

    def in_degree(self) -> dict[int, int]:
        deg = {q: 0 for q in self.reachable()}
        for q in deg:
            for _, t in self.arcs[q]:
                deg[t] += 1
        return deg

    def is_cyclic(self) -> bool:
        color: dict[int, int] = {}
        for r in self.roots:
            if r in color:
                continue
            stack = [(r, iter(self.arcs[r]))]
            color[r] = 1
            while stack:
                q, it = stack[-1]
                for _, t in it:
                    c = color.get(t, 0)
                    if c == 1:
                        return True
                    if c == 0:
                        color[t] = 1
                        stack.append((t, iter(self.arcs[t])))
                        break
                else:
                    color[q] = 2
                    stack.pop()
        return False

    def with_roots(self, roots) -> "Mrs":
        return canonical(Mrs(self.types, self.arcs, tuple(roots)))

    def paths(self, start: int | None = None) -> Iterator[tuple]:
        """All paths from ``start`` (acyclic graphs only), preorder."""
        q0 = self.roots[0] if start is None else start
        stack = [((), q0)]
        while stack:
            p, q = stack.pop()
            yield p, q
            for f, t in reversed(self.arcs[q]):
                stack.append((p + (f,), t))


def canonical(g: Mrs) -> Mrs:
    """Renumber reachable nodes in DFS preorder from the roots."""
    order = g.reachable()
    num = {q: i for i, q in enumerate(order)}
    types = tuple(g.types[q] for q in order)
    arcs = tuple(tuple((f, num[t]) for f, t in g.arcs[q]) for q in order)
    return Mrs(types, arcs, tuple(num[r] for r in g.roots))


def make_mrs(types, arcs, roots) -> Mrs:
    """Build from plain containers; ``arcs[i]`` may be a dict."""
    norm = []
    for a in arcs:
        items = a.items() if isinstance(a, dict) else a
        norm.append(tuple(sorted(items)))
    return canonical(Mrs(tuple(types), tuple(norm), tuple(roots)))


def disjoint_union(gs) -> tuple[Mrs, list[list[int]]]:
    types, arcs, roots, maps = [], [], [], []
    for g in gs:
        off = len(types)
        types.extend(g.types)
        arcs.extend(tuple((f, t + off) for f, t in a) for a in g.arcs)
        roots.extend(r + off for r in g.roots)
        maps.append([off + i for i in range(len(g.types))])
    return Mrs(tuple(types), tuple(arcs), tuple(roots)), maps


def morphism(a: Mrs, b: Mrs, h: TypeHierarchy, roots=None):
    """Subsumption morphism from ``a`` to ``b`` mapping roots pairwise.

    Returns the node map when ``a`` subsumes ``b`` (a ⊑ b), else None.
    The map is forced arc by arc, so no search is needed.
    """
    pairs = list(zip(a.roots, b.roots)) if roots is None else list(roots)
    m: dict[int, int] = {}
    stack = pairs[::-1]
    while stack:
        x, y = stack.pop()
        if x in m:
            if m[x] != y:
                return None
            continue
        if not h.subsumes(a.types[x], b.types[y]):
            return None
        m[x] = y
        barcs = dict(b.arcs[y])
        for f, t in a.arcs[x]:
            u = barcs.get(f)
            if u is None:
                return None
            stack.append((t, u))
    return m


class Builder:
    """Mutable graph with union-find node merging and congruence closure."""

    __slots__ = ("h", "parent", "type", "arcs", "clash")

    def __init__(self, h: TypeHierarchy):
        self.h = h
        self.parent: list[int] = []
        self.type: list[str] = []
        self.arcs: list[dict] = []
        self.clash = None

    def new(self, t: str = BOTTOM) -> int:
        self.parent.append(len(self.parent))
        self.type.append(t)
        self.arcs.append({})
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def ok(self) -> bool:
        return self.clash is None

    def set_type(self, x: int, t: str) -> bool:
        x = self.find(x)
        l = self.h.lub(self.type[x], t)
        if l is None:
            self.clash = (x, self.type[x], t)
            return False
        self.type[x] = l
        return True

    def child(self, x: int, f: str, create: bool = True):
        x = self.find(x)
        y = self.arcs[x].get(f)
        if y is None:
            if not create:
                return None
            y = self.new()
            self.arcs[x][f] = y
        return self.find(y)

    def add_arc(self, x: int, f: str, y: int) -> bool:
        x = self.find(x)
        old = self.arcs[x].get(f)
        if old is None:
            self.arcs[x][f] = y
            return True
        return self.union(old, y)

    def union(self, a: int, b: int) -> bool:
        work = [(a, b)]
        h = self.h
        while work:
            a, b = work.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            l = h.lub(self.type[a], self.type[b])
            if l is None:
                self.clash = (a, self.type[a], self.type[b])
                return False
            if len(self.arcs[a]) < len(self.arcs[b]):
                a, b = b, a
            self.parent[b] = a
            self.type[a] = l
            aa = self.arcs[a]
            for f, y in self.arcs[b].items():
                x = aa.get(f)
                if x is None:
                    aa[f] = y
                else:
                    work.append((x, y))
            self.arcs[b] = {}
        return True

    def add_mrs(self, g: Mrs) -> list[int]:
        base = len(self.parent)
        for t in g.types:
            self.new(t)
        for q, a in enumerate(g.arcs):
            self.arcs[base + q] = {f: base + t for f, t in a}
        return [base + i for i in range(len(g.types))]

    def freeze(self, roots) -> Mrs:
        roots = [self.find(r) for r in roots]
        order: dict[int, int] = {}
        stack = list(reversed(roots))
        while stack:
            q = self.find(stack.pop())
            if q in order:
                continue
            order[q] = len(order)
            stack.extend(self.find(t) for _, t in sorted(self.arcs[q].items(), reverse=True))
        types = tuple(self.type[q] for q in order)
        arcs = tuple(tuple(sorted((f, order[self.find(t)]) for f, t in self.arcs[q].items())) for q in order)
        return Mrs(types, arcs, tuple(order[r] for r in roots))
