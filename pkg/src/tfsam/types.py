"""Type hierarchies with appropriateness.

A hierarchy is built once from characterization statements
(``t sub [...] intro [f:r, ...]``) and is immutable afterwards. Least upper
bounds are tabulated for every pair at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import networkx as nx

from .errors import (
    ApproprNonMonotone,
    DuplicateCharacterization,
    FeatureIntroductionViolation,
    FeatureRedeclaredOnSubtype,
    NotAPartialOrder,
    NotBoundedComplete,
    UndeclaredType,
)

BOTTOM = "bot"
TOP = "top"
INCONSISTENT = None  # lub of types with no common upper bound


@dataclass(frozen=True)
class CharStatement:
    subject: str
    subs: tuple[str, ...] = ()
    intros: tuple[tuple[str, str], ...] = ()
    line: int = 0

    def render(self) -> str:
        s = f"{self.subject} sub [{','.join(self.subs)}]"
        if self.intros:
            s += " intro [" + ",".join(f"{f}:{r}" for f, r in self.intros) + "]"
        return s + "."


class FeatureSpec(NamedTuple):
    feature: str
    restriction: str
    position: int  # 1-based


@dataclass(frozen=True, eq=False)
class TypeHierarchy:
    types: tuple[str, ...]
    statements: tuple[CharStatement, ...]
    parents: dict
    children: dict
    feature_ordinal: dict
    introducer: dict
    _up: dict = field(repr=False)
    _lub: dict = field(repr=False)
    _feats: dict = field(repr=False)
    _pos: dict = field(repr=False)
    _depth: dict = field(repr=False)

    # ---- queries -------------------------------------------------------
    def __contains__(self, t) -> bool:
        return t in self._up

    def subsumes(self, t1: str, t2: str) -> bool:
        """t1 ⊑ t2 (t1 is more general)."""
        return t2 in self._up[t1]

    def lub(self, t1: str, t2: str):
        if t1 == t2:
            return t1
        return self._lub[t1, t2]

    def upper_bounds(self, t: str) -> frozenset:
        return self._up[t]

    def features_of(self, t: str) -> list[FeatureSpec]:
        return list(self._feats[t])

    def feature_names(self, t: str) -> tuple[str, ...]:
        return tuple(fs.feature for fs in self._feats[t])

    def arity(self, t: str) -> int:
        return len(self._feats[t])

    def approp(self, f: str, t: str):
        p = self._pos[t].get(f)
        return None if p is None else self._feats[t][p - 1].restriction

    def position(self, t: str, f: str):
        return self._pos[t].get(f)

    def depth(self, t: str) -> int:
        return self._depth[t]

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(sorted(self.feature_ordinal, key=self.feature_ordinal.get))

    def glb(self, ts: Iterable[str]) -> str:
        ts = list(ts)
        if not ts:
            raise ValueError("glb of an empty set")
        lower = [u for u in self.types if all(self.subsumes(u, t) for t in ts)]
        out = BOTTOM
        for u in lower:
            out = self.lub(out, u)
        return out

    def detect_approp_loops(self) -> list[list[str]]:
        g = nx.DiGraph()
        for t in self.types:
            for fs in self._feats[t]:
                g.add_edge(t, fs.restriction)
        order = {t: i for i, t in enumerate(self.types)}
        loops = []
        for cyc in nx.simple_cycles(g):
            k = min(range(len(cyc)), key=lambda i: order[cyc[i]])
            loops.append(cyc[k:] + cyc[:k])
        loops.sort(key=lambda c: [order[t] for t in c])
        return loops

    def source(self) -> str:
        return "\n".join(s.render() for s in self.statements)


def _bits_closure(types, parents):
    """Reflexive-transitive closure of the subtype relation (Warshall)."""
    n = len(types)
    idx = {t: i for i, t in enumerate(types)}
    reach = [[False] * n for _ in range(n)]
    for t in types:
        reach[idx[t]][idx[t]] = True
        for p in parents[t]:
            reach[idx[p]][idx[t]] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return idx, reach


def compile_hierarchy(statements: Iterable[CharStatement]) -> TypeHierarchy:
    stmts = list(statements)
    if not stmts:
        raise ValueError("empty statement list")
    by_subject: dict[str, CharStatement] = {}
    for s in stmts:
        if s.subject in by_subject:
            raise DuplicateCharacterization(f"type {s.subject} characterized twice (line {s.line})", type=s.subject)
        if s.subject == TOP:
            raise UndeclaredType("the top type cannot be declared", type=TOP)
        by_subject[s.subject] = s
    declared = set(by_subject) | {BOTTOM}
    for s in stmts:
        for t in list(s.subs) + [r for _, r in s.intros]:
            if t not in declared:
                raise UndeclaredType(f"type {t} used by {s.subject} is not declared", type=t)
    # implicit bottom: every type that is nobody's subtype hangs off bot
    mentioned = {c for s in stmts for c in s.subs}
    orphans = sorted(t for t in by_subject if t != BOTTOM and t not in mentioned)
    if BOTTOM in by_subject:
        b = by_subject[BOTTOM]
        by_subject[BOTTOM] = CharStatement(BOTTOM, b.subs + tuple(o for o in orphans if o not in b.subs), b.intros, b.line)
    else:
        by_subject[BOTTOM] = CharStatement(BOTTOM, tuple(orphans))

    # canonical type order: preorder from bot following sub lists
    order: list[str] = []
    seen = set()
    stack = [BOTTOM]
    while stack:
        t = stack.pop()
        if t in seen:
            continue
        seen.add(t)
        order.append(t)
        stack.extend(reversed(by_subject[t].subs))
    parents = {t: [] for t in order}
    children = {t: list(by_subject[t].subs) for t in order}
    for t in order:
        for c in by_subject[t].subs:
            if t not in parents[c]:
                parents[c].append(t)

    idx, reach = _bits_closure(order, parents)
    for i, t in enumerate(order):
        for j in range(i + 1, len(order)):
            if reach[i][j] and reach[j][i]:
                raise NotAPartialOrder(f"{t} and {order[j]} subsume each other")
    up = {t: frozenset(order[j] for j in range(len(order)) if reach[idx[t]][j]) for t in order}

    lub: dict = {}
    for i, t1 in enumerate(order):
        for t2 in order[i + 1:]:
            ub = up[t1] & up[t2]
            minimal = [u for u in ub if not any(v != u and u in up[v] for v in ub)]
            if not minimal:
                r = INCONSISTENT
            elif len(minimal) > 1:
                minimal.sort(key=order.index)
                raise NotBoundedComplete(t1, t2, minimal)
            else:
                r = minimal[0]
            lub[t1, t2] = lub[t2, t1] = r

    # features
    ordinal: dict[str, int] = {}
    introducer: dict[str, str] = {}
    for t in order:
        for f, _ in by_subject[t].intros:
            if f not in ordinal:
                ordinal[f] = len(ordinal)
    intro_at: dict[str, list[str]] = {}
    for t in order:
        for f, r in by_subject[t].intros:
            intro_at.setdefault(f, []).append(t)
    for f, ts in intro_at.items():
        for t in ts:
            for t0 in ts:
                if t0 != t and t in up[t0]:
                    raise FeatureRedeclaredOnSubtype(f"feature {f} introduced at {t0} is redeclared on subtype {t}", feature=f, type=t)
    approp: dict[str, dict[str, str]] = {t: {} for t in order}
    for f, ts in intro_at.items():
        carriers = {u for t in ts for u in up[t]}
        lower = [u for u in order if all(c in up[u] for c in carriers)]
        m = BOTTOM
        for u in lower:
            m = lub[m, u] if m != u else m
        if m not in carriers:
            raise FeatureIntroductionViolation(f"feature {f} has no unique introducing type", feature=f)
        introducer[f] = m
        for t in ts:
            r = dict(by_subject[t].intros)[f]
            for u in up[t]:
                prev = approp[u].get(f)
                approp[u][f] = r if prev is None else (lub[prev, r] if prev != r else r)
                if approp[u][f] is None:
                    raise ApproprNonMonotone(f"restrictions of {f} at {u} are inconsistent", feature=f, type=u)
    for t in order:
        for u in up[t]:
            for f, r in approp[t].items():
                r2 = approp[u].get(f)
                if r2 is None or not (r2 in up[r]):
                    raise ApproprNonMonotone(f"Approp({f},{t}) not monotone at {u}", feature=f, t1=t, t2=u)

    feats, pos = {}, {}
    for t in order:
        fl = sorted(approp[t], key=ordinal.get)
        feats[t] = tuple(FeatureSpec(f, approp[t][f], i + 1) for i, f in enumerate(fl))
        pos[t] = {f: i + 1 for i, f in enumerate(fl)}

    depth: dict[str, int] = {}
    for t in _topo(order, parents):
        depth[t] = 1 + max((depth[p] for p in parents[t]), default=-1)

    norm = tuple(by_subject[t] for t in order)
    return TypeHierarchy(
        types=tuple(order), statements=norm, parents={t: tuple(v) for t, v in parents.items()},
        children={t: tuple(v) for t, v in children.items()}, feature_ordinal=ordinal, introducer=introducer,
        _up=up, _lub=lub, _feats=feats, _pos=pos, _depth=depth,
    )


def _topo(order, parents):
    done, out = set(), []

    def visit(t):
        if t in done:
            return
        done.add(t)
        for p in parents[t]:
            visit(p)
        out.append(t)

    for t in order:
        visit(t)
    return out
