"""Typed feature structures as graphs, plus the linear term and AVM syntaxes.

Term syntax: ``[n]type(arg1,...,argk)`` where the arguments follow the
type's feature order, ``[n]`` is an optional reentrancy tag and a type
without arguments is the most general structure of that type. A repeated
tag refers back to the node introduced at its first occurrence; a tag
with no type at its first occurrence is typed ``bot``. Circled digits
(①, ②, ...) are accepted as tags on input.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import CyclicStructure, IndexOutOfRange, SourceSyntaxError
from .graph import Builder, Mrs, canonical, make_mrs, morphism
from .types import BOTTOM, TypeHierarchy


@dataclass(frozen=True, eq=False)
class Tfs(Mrs):
    @property
    def root(self) -> int:
        return self.roots[0]


def as_tfs(g: Mrs) -> Tfs:
    if len(g.roots) != 1:
        raise ValueError("a TFS has exactly one root")
    return Tfs(g.types, g.arcs, g.roots)


def single_node(t: str) -> Tfs:
    return Tfs((t,), ((),), (0,))


class _Nonexistent:
    def __repr__(self):
        return "NONEXISTENT"


NONEXISTENT = _Nonexistent()


def val(a: Mrs, path, root: int | None = None):
    q = a.walk(a.roots[0] if root is None else root, tuple(path))
    if q is None:
        return NONEXISTENT
    return as_tfs(canonical(Mrs(a.types, a.arcs, (q,))))


def subsumes(a: Mrs, b: Mrs, h: TypeHierarchy):
    """The subsumption morphism from a to b when a ⊑ b, else None."""
    if len(a.roots) != len(b.roots):
        return None
    return morphism(a, b, h)


def alphabetic_variants(a: Mrs, b: Mrs) -> bool:
    return canonical(a) == canonical(b)


def is_cyclic(a: Mrs) -> bool:
    return a.is_cyclic()


def project(m: Mrs, i: int) -> Tfs:
    if not 1 <= i <= len(m.roots):
        raise IndexOutOfRange(f"index {i} outside 1..{len(m.roots)}")
    return as_tfs(canonical(Mrs(m.types, m.arcs, (m.roots[i - 1],))))


def rank(a: Mrs, h: TypeHierarchy, r=None) -> int:
    """Reentrancies plus the summed type ranks of all paths.

    ``r`` defaults to the hierarchy depth, so r(bot) = 0. With that choice
    an extra arc to a bot leaf leaves the rank unchanged; strictness on
    partial (not totally well-typed) structures needs r(bot) > 0.
    """
    if a.is_cyclic():
        raise CyclicStructure("rank is defined for acyclic structures only")
    r = h.depth if r is None else r
    nodes = set(a.reachable())
    n_paths = 0
    theta = 0
    for _, q in a.paths():
        n_paths += 1
        theta += r(a.types[q])
    return (n_paths - len(nodes)) + theta


# ---------------------------------------------------------------- printing

def _occurrences(g: Mrs) -> dict[int, int]:
    occ: dict[int, int] = {}
    seen = set()
    stack = list(reversed(g.roots))
    while stack:
        q = stack.pop()
        occ[q] = occ.get(q, 0) + 1
        if q in seen:
            continue
        seen.add(q)
        stack.extend(t for _, t in reversed(g.arcs[q]))
    return occ


def _args(g: Mrs, h: TypeHierarchy, q: int):
    arcs = dict(g.arcs[q])
    if not arcs:
        return None
    out = []
    for fs in h.features_of(g.types[q]):
        out.append((fs.feature, arcs.get(fs.feature), fs.restriction))
    return out


def term_str(g: Mrs, h: TypeHierarchy) -> str:
    """Render every root of ``g`` in linear term syntax, comma separated."""
    occ = _occurrences(g)
    tags: dict[int, int] = {}
    done: set[int] = set()

    def tag_of(q):
        if occ[q] > 1 or q in tags:
            if q not in tags:
                tags[q] = len(tags) + 1
            return f"[{tags[q]}]"
        return ""

    def render(q) -> str:
        if q in done:
            return tag_of(q)
        done.add(q)
        tag = tag_of(q)
        t = g.types[q]
        args = _args(g, h, q)
        if args is None:
            if tag and t == BOTTOM:
                return tag
            return tag + t
        parts = [render(c) if c is not None else r for _, c, r in args]
        return f"{tag}{t}({','.join(parts)})"

    # cycles need their tag at first occurrence; occurrences count revisits
    return ", ".join(render(r) for r in g.roots)


def avm_str(g: Mrs, h: TypeHierarchy) -> str:
    occ = _occurrences(g)
    tags: dict[int, int] = {}
    done: set[int] = set()

    def lines(q) -> list[str]:
        if occ[q] > 1 and q not in tags:
            tags[q] = len(tags) + 1
        tag = f"[{tags[q]}] " if q in tags else ""
        if q in done:
            return [tag.strip()]
        done.add(q)
        out = [tag + g.types[q]]
        for f, c in sorted(g.arcs[q], key=lambda fc: h.feature_ordinal.get(fc[0], 0)):
            sub = lines(c)
            lead = f"  {f.upper()}: "
            out.append(lead + sub[0])
            out.extend(" " * len(lead) + s for s in sub[1:])
        return out

    return "\n".join("\n".join(lines(r)) for r in g.roots)


def to_json(g: Mrs, h: TypeHierarchy):
    occ = _occurrences(g)
    tags: dict[int, int] = {}
    done: set[int] = set()

    def node(q):
        if occ[q] > 1 and q not in tags:
            tags[q] = len(tags) + 1
        if q in done:
            return {"ref": tags[q]}
        done.add(q)
        d = {"type": g.types[q]}
        if q in tags:
            d["tag"] = tags[q]
        if g.arcs[q]:
            d["feats"] = {f: node(c) for f, c in sorted(g.arcs[q], key=lambda fc: h.feature_ordinal.get(fc[0], 0))}
        return d

    return [node(r) for r in g.roots]


def json_str(g: Mrs, h: TypeHierarchy) -> str:
    return json.dumps(to_json(g, h), sort_keys=False)


# ----------------------------------------------------------------- parsing

_CIRCLED = {chr(0x2460 + i): i + 1 for i in range(20)}
_TOKEN = re.compile(r"\s*(?:(\[\d+\])|([①-⑳])|([A-Za-z0-9_$^'][A-Za-z0-9_$^'\-]*)|([(),]))")


def parse_term(text: str, h: TypeHierarchy) -> Mrs:
    """Parse one or more comma-separated terms into a multi-rooted graph."""
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SourceSyntaxError(f"unexpected character {text[pos]!r}", 1, pos + 1)
        if m.group(1):
            toks.append(("tag", int(m.group(1)[1:-1]), m.start(1)))
        elif m.group(2):
            toks.append(("tag", _CIRCLED[m.group(2)], m.start(2)))
        elif m.group(3):
            toks.append(("id", m.group(3), m.start(3)))
        else:
            toks.append((m.group(4), m.group(4), m.start(4)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    toks.append(("eof", None, len(text)))

    b = Builder(h)
    tagnode: dict[int, int] = {}
    i = 0

    def expect(kind):
        nonlocal i
        k, v, p = toks[i]
        if k != kind:
            raise SourceSyntaxError(f"expected {kind}, found {v!r}", 1, p + 1)
        i += 1
        return v

    def term() -> int:
        nonlocal i
        k, v, p = toks[i]
        node = None
        if k == "tag":
            i += 1
            if v in tagnode:
                node = tagnode[v]
            else:
                node = tagnode[v] = b.new()
            k, v, p = toks[i]
        if k != "id":
            if node is None:
                raise SourceSyntaxError(f"expected a type or tag, found {v!r}", 1, p + 1)
            return node
        i += 1
        if v not in h:
            raise SourceSyntaxError(f"unknown type {v}", 1, p + 1)
        if node is None:
            node = b.new()
        if not b.set_type(node, v):
            raise SourceSyntaxError(f"inconsistent tag types at {v}", 1, p + 1)
        if toks[i][0] == "(":
            i += 1
            feats = h.feature_names(v)
            args = []
            if toks[i][0] != ")":
                args.append(term())
                while toks[i][0] == ",":
                    i += 1
                    args.append(term())
            expect(")")
            if len(args) != len(feats):
                raise SourceSyntaxError(f"type {v} takes {len(feats)} arguments, got {len(args)}", 1, p + 1)
            for f, a in zip(feats, args):
                if not b.add_arc(node, f, a):
                    raise SourceSyntaxError("inconsistent reentrancy", 1, p + 1)
        return node

    roots = [term()]
    while toks[i][0] == ",":
        i += 1
        roots.append(term())
    expect("eof")
    return b.freeze(roots)


def parse_tfs(text: str, h: TypeHierarchy) -> Tfs:
    return as_tfs(parse_term(text, h))


__all__ = [
    "Tfs", "as_tfs", "single_node", "NONEXISTENT", "val", "subsumes", "alphabetic_variants",
    "is_cyclic", "project", "rank", "term_str", "avm_str", "to_json", "json_str",
    "parse_term", "parse_tfs", "make_mrs",
]
