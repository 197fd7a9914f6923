"""Normal-term shaping: totality fill, type tightening and pruning.

A graph is in normal form when every node either carries all of its
appropriate arcs or none. A node without arcs stands for the most general
structure of its type (a "partial" sub-term). ``prune`` collapses
sub-terms that carry no information beyond their type; ``fill`` adds the
missing arcs of expanded nodes and joins arc values with their
appropriateness restrictions.
"""

from __future__ import annotations

from .errors import InconsistentDescription, UnknownFeature
from .graph import Builder, Mrs, canonical
from .types import TypeHierarchy


def fill(b: Builder) -> None:
    """Close a builder under feature promotion, totality and restriction joins."""
    h = b.h
    work = [x for x in range(len(b.parent)) if b.find(x) == x and b.arcs[x]]
    while work:
        x = b.find(work.pop())
        arcs = b.arcs[x]
        if not arcs:
            continue
        for f in list(arcs):
            intro = h.introducer.get(f)
            if intro is None:
                raise UnknownFeature(f"feature {f} is not declared", feature=f)
            if not h.subsumes(intro, b.type[x]):
                if not b.set_type(x, intro):
                    raise InconsistentDescription(f"feature {f} needs type {intro}, node is {b.type[x]}", t1=b.type[x], t2=intro)
        for fs in h.features_of(b.type[x]):
            y = arcs.get(fs.feature)
            if y is None:
                arcs[fs.feature] = b.new(fs.restriction)
                continue
            y = b.find(y)
            if not h.subsumes(fs.restriction, b.type[y]):
                before = b.type[y]
                if not b.set_type(y, fs.restriction):
                    raise InconsistentDescription(
                        f"value of {fs.feature} is {before}, incompatible with restriction {fs.restriction}",
                        t1=before, t2=fs.restriction)
                if b.arcs[y]:
                    work.append(y)


def prune(g: Mrs, h: TypeHierarchy) -> Mrs:
    """Drop the arcs of nodes whose values are unshared most-general leaves."""
    deg = g.in_degree()
    roots = set(g.roots)
    arcs = [list(a) for a in g.arcs]
    state: dict[int, int] = {}
    for r in g.roots:
        if r in state:
            continue
        stack = [(r, 0)]
        state[r] = 1
        while stack:
            q, i = stack[-1]
            if i < len(arcs[q]):
                stack[-1] = (q, i + 1)
                t = arcs[q][i][1]
                if t not in state:
                    state[t] = 1
                    stack.append((t, 0))
                continue
            stack.pop()
            state[q] = 2
            if not arcs[q]:
                continue
            tq = g.types[q]
            if all(
                deg[t] == 1 and t not in roots and not arcs[t] and state.get(t) == 2
                and g.types[t] == h.approp(f, tq)
                for f, t in arcs[q]
            ):
                arcs[q] = []
    return canonical(Mrs(g.types, tuple(tuple(a) for a in arcs), g.roots))


def filled(g: Mrs, h: TypeHierarchy) -> Mrs:
    b = Builder(h)
    ids = b.add_mrs(g)
    fill(b)
    return b.freeze([ids[r] for r in g.roots])


def normal_form(g: Mrs, h: TypeHierarchy) -> Mrs:
    return prune(filled(g, h), h)


def is_normal(g: Mrs, h: TypeHierarchy) -> bool:
    for q in g.reachable():
        names = tuple(f for f, _ in g.arcs[q])
        if names and sorted(names) != sorted(h.feature_names(g.types[q])):
            return False
    return True
