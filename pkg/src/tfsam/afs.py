"""Abstract feature structures and abstract multi-rooted structures.

An AMRS is kept as the canonical representative of its alphabetic-variant
class: an acyclic graph renumbered deterministically. Two AMRSs are equal
exactly when their (Π, Θ, ≈) triples are equal, and the path-level views
are derived on demand. Unification is congruence closure on the union of
the operands' graphs, which is the least fusion-closed, equivalence-closed,
type-joined extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import CyclicStructure, IndexOutOfRange
from .graph import Builder, Mrs, canonical, disjoint_union, morphism
from .tfs import Tfs
from .types import TypeHierarchy


class _Fail:
    def __repr__(self):
        return "FAIL"

    def __bool__(self):
        return False


FAIL = _Fail()


@dataclass(frozen=True, eq=False)
class Amrs(Mrs):
    """Indexed paths are pairs ``(i, path)`` with 1-based ``i``."""

    @cached_property
    def pi(self) -> frozenset:
        return frozenset((i + 1, p) for i, r in enumerate(self.roots) for p, _ in self.paths(r))

    @cached_property
    def _node_of(self) -> dict:
        return {(i + 1, p): q for i, r in enumerate(self.roots) for p, q in self.paths(r)}

    def theta(self, ip) -> str:
        return self.types[self._node_of[ip]]

    def equiv(self, ip1, ip2) -> bool:
        return self._node_of[ip1] == self._node_of[ip2]

    def classes(self) -> list[frozenset]:
        by: dict[int, set] = {}
        for ip, q in self._node_of.items():
            by.setdefault(q, set()).add(ip)
        return [frozenset(v) for _, v in sorted(by.items())]


@dataclass(frozen=True, eq=False)
class Afs(Amrs):
    """Single-rooted AMRS; paths are plain feature tuples."""

    @cached_property
    def pi(self) -> frozenset:
        return frozenset(p for p, _ in self.paths(self.roots[0]))

    def theta(self, p) -> str:
        return self.types[self.walk(self.roots[0], p)]

    def equiv(self, p1, p2) -> bool:
        return self.walk(self.roots[0], p1) == self.walk(self.roots[0], p2)

    def classes(self) -> list[frozenset]:
        by: dict[int, set] = {}
        for p, q in self.paths(self.roots[0]):
            by.setdefault(q, set()).add(p)
        return [frozenset(v) for _, v in sorted(by.items())]


LAMBDA = Amrs((), (), ())


def amrs_of(g: Mrs) -> Amrs:
    c = canonical(g)
    if c.is_cyclic():
        raise CyclicStructure("abstract structures must be acyclic")
    return Amrs(c.types, c.arcs, c.roots)


def afs_of(g: Mrs) -> Afs:
    if len(g.roots) != 1:
        raise ValueError("an AFS has exactly one root")
    c = amrs_of(g)
    return Afs(c.types, c.arcs, c.roots)


def abs_(a: Mrs) -> Afs:
    return afs_of(a)


def abs_mrs(m: Mrs) -> Amrs:
    return amrs_of(m)


def conc(f: Amrs) -> Tfs | Mrs:
    if len(f.roots) == 1:
        return Tfs(f.types, f.arcs, f.roots)
    return Mrs(f.types, f.arcs, f.roots)


def _freeze(b: Builder, roots, single: bool):
    g = b.freeze(roots)
    if g.is_cyclic():
        raise CyclicStructure("unification produced a cyclic structure")
    return (Afs if single else Amrs)(g.types, g.arcs, g.roots)


def normalize(paths: Iterable, theta: dict, equiv: Iterable, h: TypeHierarchy, n: int | None = None):
    """Close a pre-structure under fusion, equivalence and typing.

    ``paths`` holds plain paths (an AFS) when ``n`` is None, otherwise
    indexed paths ``(i, path)``. Returns FAIL when some class types to ⊤.
    """
    b = Builder(h)
    single = n is None
    roots = [b.new()] if single else [b.new() for _ in range(n)]
    node: dict = {}

    def node_of(ip):
        if ip in node:
            return node[ip]
        i, p = (1, ip) if single else ip
        q = roots[i - 1]
        for f in p:
            q = b.child(q, f)
        node[ip] = q
        return q

    for ip in paths:
        node_of(ip)
    for ip, t in theta.items():
        if not b.set_type(node_of(ip), t):
            return FAIL
    for x, y in equiv:
        if not b.union(node_of(x), node_of(y)):
            return FAIL
    return _freeze(b, roots, single)


def unify_afs(a: Amrs, b: Amrs, h: TypeHierarchy):
    bl = Builder(h)
    ia = bl.add_mrs(a)
    ib = bl.add_mrs(b)
    for ra, rb in zip(a.roots, b.roots):
        if not bl.union(ia[ra], ib[rb]):
            return FAIL
    return _freeze(bl, [ia[r] for r in a.roots], len(a.roots) == 1)


def unify_in_context(a: Amrs, J: Iterable[int], b: Amrs, h: TypeHierarchy):
    """(a, J) ⊔ b: merge a's roots in J with b's (b's only root if b is an AFS)."""
    J = list(J)
    bl = Builder(h)
    ia = bl.add_mrs(a)
    ib = bl.add_mrs(b)
    as_afs = len(b.roots) == 1 and len(J) == 1
    for j in J:
        if not 1 <= j <= len(a.roots):
            raise IndexOutOfRange(f"index {j} outside 1..{len(a.roots)}")
        rb = b.roots[0] if as_afs else b.roots[j - 1]
        if not bl.union(ia[a.roots[j - 1]], ib[rb]):
            return FAIL
    return _freeze(bl, [ia[r] for r in a.roots], False)


def substructure(a: Amrs, j: int, k: int) -> Amrs:
    n = len(a.roots)
    if not (1 <= j <= k <= n or (j == k + 1 and 1 <= j <= n + 1)):
        raise IndexOutOfRange(f"substructure {j}..{k} of length {n}")
    return select(a, range(j, k + 1))


def select(a: Amrs, indices: Iterable[int]) -> Amrs:
    roots = tuple(a.roots[i - 1] for i in indices)
    return amrs_of(Mrs(a.types, a.arcs, roots))


def concat(a: Amrs, b: Amrs) -> Amrs:
    g, _ = disjoint_union([a, b])
    return amrs_of(g)


def afs_subsumes(a: Amrs, b: Amrs, h: TypeHierarchy) -> bool:
    """a ⪯ b: a is more general than (or equal to) b."""
    return len(a.roots) == len(b.roots) and morphism(a, b, h) is not None


def strictly_subsumes(a: Amrs, b: Amrs, h: TypeHierarchy) -> bool:
    return a != b and afs_subsumes(a, b, h)
