"""Built-in goals: ``append(L1,L2,L3)`` over lists, ``union(S1,S2,S3)`` over sets.

Lists are ``e_list`` / ``ne_list`` cells with ``hd``/``tl`` arcs; sets are
``e_set`` / ``ne_set`` cells with ``elt``/``elts`` arcs. The first argument
must be instantiated: walking it may not hit a cell whose type is compatible
with, but not yet one of, the empty/non-empty types. ``union`` keeps
duplicates (it concatenates), since element identity is not decidable on
partial structures without committing to a unification.

The same walk is implemented twice: on the machine heap and on a graph
:class:`Builder` (used by the reference parser).
"""

from __future__ import annotations

from ..errors import NotAList, NotASet, UnknownGoal
from ..graph import Builder
from ..types import TypeHierarchy
from .grammar import GOALS, LIST_TYPES, SET_TYPES

CONS, NIL, OPEN = "cons", "nil", "open"


def encoding(name: str):
    if name == "append":
        return LIST_TYPES, NotAList
    if name == "union":
        return SET_TYPES, NotASet
    raise UnknownGoal(f"goal {name} is not a built-in", name=name)


def classify(h: TypeHierarchy, t: str, name: str) -> str:
    (e, ne, _, _), err = encoding(name)
    if h.subsumes(ne, t):
        return CONS
    if h.subsumes(e, t):
        return NIL
    if h.lub(t, ne) is not None or h.lub(t, e) is not None:
        return OPEN
    raise err(f"{name}: argument of type {t} is not a {'list' if name == 'append' else 'set'}", type=t)


# ------------------------------------------------------------------ heap

def eval_goal(m, name: str, args) -> bool:
    """Run a goal on heap addresses; False means the goal fails."""
    if name not in GOALS:
        raise UnknownGoal(f"goal {name} is not a built-in", name=name)
    (e, ne, fh, ft), _ = encoding(name)
    h = m.h
    elems, seen = [], set()
    a = m.deref(args[0])
    while True:
        tag, val = m.heap[a]
        if tag == "REF":  # self-referential: unknown
            return False
        kind = classify(h, val, name)
        if kind == OPEN:
            return False
        if kind == NIL:
            break
        if tag == "VAR":
            b = m.build_most_general_fs(val)
            m.bind(a, b)
            a = b
        if a in seen:
            return False
        seen.add(a)
        elems.append(a + h.position(val, fh))
        a = m.deref(a + h.position(val, ft))
    tail = args[1]
    for x in reversed(elems):
        n = m.build_most_general_fs(ne)
        if not (m.unify(n + h.position(ne, fh), x) and m.unify(n + h.position(ne, ft), tail)):
            return False
        tail = n
    return m.unify(tail, args[2])


# ----------------------------------------------------------------- graph

def eval_goal_graph(b: Builder, name: str, nodes) -> bool:
    """Run a goal on builder nodes; the caller re-runs ``fill`` afterwards."""
    if name not in GOALS:
        raise UnknownGoal(f"goal {name} is not a built-in", name=name)
    (e, ne, fh, ft), _ = encoding(name)
    h = b.h
    elems, seen = [], set()
    x = b.find(nodes[0])
    while True:
        kind = classify(h, b.type[x], name)
        if kind == OPEN:
            return False
        if kind == NIL:
            break
        if x in seen:
            return False
        seen.add(x)
        elems.append(b.child(x, fh))
        x = b.child(x, ft)
    tail = nodes[1]
    for y in reversed(elems):
        n = b.new(ne)
        if not (b.add_arc(n, fh, y) and b.add_arc(n, ft, tail)):
            return False
        tail = n
    return b.union(tail, nodes[2])
