"""Grammar model: rules as multi-rooted graphs, lexicon, empty categories.

A rule graph lists its body elements, then its head, then one extra root
per goal argument (so goals can name nodes of the rule). Only the first
``n = len(body) + 1`` roots form the rule proper.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from ..errors import InconsistentDescription, NotAList, NotASet, UnknownGoal, UnorderableUnitRules
from ..graph import Builder, Mrs, canonical
from ..normal import fill, prune
from ..types import TypeHierarchy
from .describe import Clause
from .frontend import SourceGrammar, parse_source

GOALS = {"append": 3, "union": 3}
LIST_TYPES = ("e_list", "ne_list", "hd", "tl")
SET_TYPES = ("e_set", "ne_set", "elt", "elts")


@dataclass(frozen=True)
class Goal:
    name: str
    args: tuple  # indices into Rule.graph.roots


@dataclass(frozen=True)
class Rule:
    name: str
    graph: Mrs
    n: int
    goals: tuple = ()
    derived_from: str | None = None

    @property
    def body_len(self) -> int:
        return self.n - 1

    @property
    def is_unit(self) -> bool:
        return self.n == 2

    @property
    def proper(self) -> Mrs:
        """The rule's multi-rooted structure without goal roots."""
        return canonical(Mrs(self.graph.types, self.graph.arcs, self.graph.roots[: self.n]))


@dataclass
class Grammar:
    h: TypeHierarchy
    rules: list
    lexicon: dict
    empties: list
    start: Mrs | None
    source: SourceGrammar | None = None
    expanded: list = field(default_factory=list)  # rules derived by ε-expansion
    facts: list = field(default_factory=list)  # derived empty-bodied rules (heads only)

    def words(self):
        return sorted(self.lexicon)


def unify_roots(h: TypeHierarchy, a: Mrs, pairs, b: Mrs | None = None, roots=None):
    """Unify node pairs of ``a`` (and optionally ``b``) under total well-typing.

    ``pairs`` holds ``(root index of a, root index of b)``; when ``b`` is
    None both indices refer to ``a``. Returns the resulting graph rooted at
    ``a``'s roots (or ``roots``, a list of a-root indices), or None.
    """
    bl = Builder(h)
    ia = bl.add_mrs(a)
    ib = bl.add_mrs(b) if b is not None else ia
    for i, j in pairs:
        x = ia[a.roots[i]]
        y = ib[(b if b is not None else a).roots[j]]
        if not bl.union(x, y):
            return None
    try:
        fill(bl)
    except InconsistentDescription:
        return None
    keep = a.roots if roots is None else [a.roots[i] for i in roots]
    return bl.freeze([ia[r] for r in keep])


def build_grammar(src: SourceGrammar | str, h: TypeHierarchy | None = None) -> Grammar:
    from ..types import compile_hierarchy

    if isinstance(src, str):
        src = parse_source(src)
    if h is None:
        h = compile_hierarchy(src.statements)
    rules = [_rule(r, h, src.macros) for r in src.rules]
    lexicon: dict[str, list] = {}
    for e in src.lexicon:
        c = Clause(h, src.macros, f"word {e.word}")
        root = c.describe(e.desc)
        lexicon.setdefault(e.word, []).append(c.finish([root]))
    empties = []
    for e in src.empties:
        c = Clause(h, src.macros, "empty category")
        root = c.describe(e.desc)
        empties.append(c.finish([root]))
    start = None
    if src.start is not None:
        c = Clause(h, src.macros, "start symbol")
        start = c.finish([c.describe(src.start)])
    g = Grammar(h, rules, lexicon, empties, start, src)
    for r in rules:
        for goal in r.goals:
            _check_goal_types(h, goal.name)
    return g


def _rule(r, h: TypeHierarchy, macros) -> Rule:
    c = Clause(h, macros, f"rule {r.name}")
    body = [c.describe(d) for d in r.body]
    head = c.describe(r.head)
    roots = body + [head]
    goals = []
    for gd in r.goals:
        if gd.name not in GOALS:
            raise UnknownGoal(f"goal {gd.name} is not a built-in (rule {r.name}, line {gd.line})", name=gd.name)
        if len(gd.args) != GOALS[gd.name]:
            raise UnknownGoal(f"goal {gd.name} takes {GOALS[gd.name]} arguments (rule {r.name})", name=gd.name)
        idx = []
        for a in gd.args:
            roots.append(c.describe(a))
            idx.append(len(roots) - 1)
        goals.append(Goal(gd.name, tuple(idx)))
    return Rule(r.name, c.finish(roots), len(body) + 1, tuple(goals))


def _check_goal_types(h: TypeHierarchy, name: str):
    if name == "append":
        e, ne, f1, f2 = LIST_TYPES
        if e not in h or ne not in h or h.introducer.get(f1) != ne or h.introducer.get(f2) != ne:
            raise NotAList(f"append needs types {e}/{ne} with features {f1},{f2}")
    else:
        e, ne, f1, f2 = SET_TYPES
        if e not in h or ne not in h or h.introducer.get(f1) != ne or h.introducer.get(f2) != ne:
            raise NotASet(f"union needs types {e}/{ne} with features {f1},{f2}")


# ------------------------------------------------------------ ε-expansion

def expand_empty_categories(rules: list, empties: list, h: TypeHierarchy):
    """One level of empty-category elimination.

    Returns ``(new_rules, facts)``: rules derived by unifying an empty
    category into one body position of an original rule (that position
    removed), and the heads of derived rules whose bodies became empty.
    Derived rules are not expanded again.
    """
    derived, facts = [], []
    for r in rules:
        if r.derived_from is not None:
            continue
        for i in range(r.body_len):
            for k, e in enumerate(empties):
                g = unify_roots(h, r.graph, [(i, 0)], e)
                if g is None:
                    continue
                g = prune(g, h)
                keep = [j for j in range(len(g.roots)) if j != i]
                idx = {old: new for new, old in enumerate(keep)}
                goals = tuple(Goal(gl.name, tuple(idx[a] for a in gl.args)) for gl in r.goals)
                graph = Mrs(g.types, g.arcs, tuple(g.roots[j] for j in keep))
                nr = Rule(f"{r.name}-e{i + 1}.{k + 1}", canonical(graph), r.n - 1, goals, r.name)
                if nr.n == 1:
                    facts.append(nr)
                else:
                    derived.append(nr)
    return derived, facts


def order_unit_rules(rules: list, h: TypeHierarchy) -> list:
    """Unit rules first, topologically sorted by the feeding relation.

    ρ1 feeds ρ2 when ρ1's head unifies with ρ2's single body element. A
    rule feeding itself is harmless (its active edge sees the complete
    edges it appends); longer feeding cycles cannot be ordered.
    """
    units = [r for r in rules if r.is_unit]
    others = [r for r in rules if not r.is_unit]
    feeds = {i: set() for i in range(len(units))}
    for i, r1 in enumerate(units):
        for j, r2 in enumerate(units):
            if i != j and unify_roots(h, r1.graph, [(1, 0)], r2.graph) is not None:
                feeds[i].add(j)
    g = nx.DiGraph()
    g.add_nodes_from(range(len(units)))
    g.add_edges_from((i, j) for i, js in feeds.items() for j in js)
    try:
        order = list(nx.lexicographical_topological_sort(g))
    except nx.NetworkXUnfeasible:
        cyc = min(nx.simple_cycles(g), key=lambda c: (len(c), c))
        raise UnorderableUnitRules(
            "unit rules feed each other cyclically: " + " -> ".join(units[k].name for k in cyc + cyc[:1])) from None
    return [units[i] for i in order] + others
